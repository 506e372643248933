//! Minimal Dörfler sets for a few bulk parameters.

use surface_afem::adaptivity::dorfler_mark;

fn main() {
    let eta = [0.05, 0.9, 0.3, 0.3, 0.02, 0.6, 0.1, 0.45];
    let total: f64 = eta.iter().map(|e| e * e).sum();
    for theta in [0.3, 0.5, 0.7, 0.9, 1.0] {
        let marked = dorfler_mark(&eta, theta);
        let mass: f64 = marked.iter().map(|&i| eta[i] * eta[i]).sum();
        println!(
            "theta {theta:.1}: marked {marked:?}  mass fraction {:.3} (target {:.3})",
            mass / total,
            theta * theta
        );
    }
}
