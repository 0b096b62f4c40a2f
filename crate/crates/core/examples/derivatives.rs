//! Exact derivatives with jets and the reverse-mode tape.
//!
//! ```bash
//! cargo run --release --example derivatives
//! ```

use vspinn::autodiff::{grad_params, Jet2};
use vspinn::network::{eval_jets, Activation, DenseNet};
use vspinn::pde::{residual, GreenshieldsFlux};

fn main() -> vspinn::Result<()> {
    // u(t, x) = tanh(t + x²) seeded at (0.3, 0.5).
    let (t, x) = (0.3, 0.5);
    let u = (Jet2::time(t) + Jet2::space(x) * Jet2::space(x)).activate(Activation::Tanh)?;
    println!("tanh(t + x^2) at ({t}, {x}):");
    println!("  value {:.12}  d_t {:.12}  d_x {:.12}  d_xx {:.12}", u.value, u.d_t, u.d_x, u.d_xx);

    let net = DenseNet::init(&[2, 30, 30, 30, 1], Activation::Tanh, 7)?;
    let jet = net.jet_forward(t, x, &[])?;
    let h = 1e-4;
    let f = |x: f64| net.forward(&[t, x]).unwrap();
    let fd_xx = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    println!("3x30 network, d_xx by jet {:.10} and by central differences {:.10}", jet.d_xx, fd_xx);

    let flux = GreenshieldsFlux::new(1.0)?;
    println!("viscous residual at gamma = 0.05: {:.6e}", residual(jet, &flux, 0.05));

    // Gradient of the squared residual with respect to every weight and bias.
    let dims = net.layer_dims().to_vec();
    let (loss, grad) = grad_params(net.params(), |tape, p| {
        let inputs = [
            Jet2::new(tape.var(t), tape.var(1.0), tape.var(0.0), tape.var(0.0)),
            Jet2::new(tape.var(x), tape.var(0.0), tape.var(1.0), tape.var(0.0)),
        ];
        let r = residual(eval_jets(&dims, Activation::Tanh, p, &inputs).unwrap(), &flux, 0.05);
        r * r
    })?;
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    println!("squared residual {loss:.6e}, gradient over {} parameters with norm {norm:.6e}", grad.len());
    Ok(())
}
