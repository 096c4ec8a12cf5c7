//! Construction of initial fields from their family descriptors.

use potwell_core::field_io;
use potwell_core::{GridSpec, RealField, StateUW};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{FieldInit, InitialConfig};
use crate::error::{CliError, Context, Result};

/// Evaluates one family on `grid`. `ground_state` must be supplied for
/// `scaled_ground_state`; `seed` feeds `random_bumps`.
pub fn build_field(
    init: &FieldInit,
    grid: GridSpec,
    ground_state: Option<&RealField>,
    seed: u64,
) -> Result<RealField> {
    let field = match *init {
        FieldInit::Zero => Ok(RealField::zeros(grid)),
        FieldInit::Gaussian { amplitude, width, center } => {
            RealField::from_fn(grid, |x| amplitude * (-((x - center) / width).powi(2)).exp())
        }
        FieldInit::SechPow { amplitude, width, exponent } => {
            RealField::from_fn(grid, |x| amplitude * (x / width).cosh().powf(-exponent))
        }
        FieldInit::DerivativeOfGaussian { amplitude, width } => RealField::from_fn(grid, |x| {
            let s = x / width;
            -2.0 * amplitude * s / width * (-s * s).exp()
        }),
        FieldInit::ScaledGroundState { lambda } => {
            let phi = ground_state.ok_or_else(|| {
                CliError::Runtime("scaled_ground_state needs a threshold result".into())
            })?;
            Ok(phi.scaled(lambda))
        }
        FieldInit::RandomBumps { amplitude, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let half = 0.5 * grid.half_length();
            let bumps: Vec<(f64, f64, f64)> = (0..count)
                .map(|_| {
                    (
                        rng.gen_range(-1.0..=1.0) * amplitude,
                        rng.gen_range(-half..=half),
                        rng.gen_range(0.5..=2.0),
                    )
                })
                .collect();
            RealField::from_fn(grid, |x| {
                bumps
                    .iter()
                    .map(|(a, c, w)| a * (-((x - c) / w).powi(2)).exp())
                    .sum()
            })
        }
        FieldInit::FromFile { ref path } => {
            let f = field_io::load(path).context(format!("loading {}", path.display()))?;
            if *f.grid() != grid {
                return Err(CliError::Config(format!(
                    "{} is on {}, run grid is {grid}",
                    path.display(),
                    f.grid()
                )));
            }
            Ok(f)
        }
    };
    field.context("initial field")
}

pub fn build_state(
    initial: &InitialConfig,
    grid: GridSpec,
    ground_state: Option<&RealField>,
    seed: u64,
) -> Result<StateUW> {
    let u = build_field(&initial.u, grid, ground_state, seed)?;
    let w = build_field(&initial.w, grid, ground_state, seed.wrapping_add(1))?;
    StateUW::new(u, w).context("initial state")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_evaluate() {
        let g = GridSpec::new(20.0, 256).unwrap();
        let f = build_field(
            &FieldInit::Gaussian { amplitude: 2.0, width: 1.0, center: 1.0 },
            g,
            None,
            0,
        )
        .unwrap();
        assert_eq!(f.samples()[g.n_modes() / 2], 2.0 * (-1f64).exp());
        let s = build_field(&FieldInit::SechPow { amplitude: 1.0, width: 1.0, exponent: 2.0 }, g, None, 0).unwrap();
        assert!((s.integral() - 2.0).abs() < 1e-10);
        let d = build_field(&FieldInit::DerivativeOfGaussian { amplitude: 3.0, width: 1.5 }, g, None, 0).unwrap();
        assert!(d.integral().abs() < 1e-13);
        assert!(build_field(&FieldInit::ScaledGroundState { lambda: 1.0 }, g, None, 0).is_err());
        let a = build_field(&FieldInit::RandomBumps { amplitude: 1.0, count: 4 }, g, None, 9).unwrap();
        let b = build_field(&FieldInit::RandomBumps { amplitude: 1.0, count: 4 }, g, None, 9).unwrap();
        let c = build_field(&FieldInit::RandomBumps { amplitude: 1.0, count: 4 }, g, None, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn derivative_of_gaussian_matches_spectral_derivative() {
        let g = GridSpec::new(20.0, 256).unwrap();
        let d = build_field(&FieldInit::DerivativeOfGaussian { amplitude: 1.0, width: 1.3 }, g, None, 0).unwrap();
        let v = RealField::from_fn(g, |x| (-(x / 1.3).powi(2)).exp()).unwrap();
        let ctx = potwell_core::SpectralContext::new(g);
        let dv = ctx.derivative(&v).unwrap();
        let err = d
            .samples()
            .iter()
            .zip(dv.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
