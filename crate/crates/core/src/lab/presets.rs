//! Default campaign configurations. The TOML files under `configs/` mirror
//! these and are checked against them by the CLI tests.

use super::{
    AnisotropyConfig, BandSpec, BankConfig, DifferenceConfig, FamilySpec, GridConfig, LabConfig, LiftingConfig,
    PeetreConfig, ScalingConfig, SpaceConfig, Theorem, Thresholds,
};

pub const DEFAULT_SEED: u64 = 20240607;

/// The two-block anisotropy `diag(1) + diag(2)` on a 64 x 64 grid whose second
/// axis is 32 times shorter, so that both blocks reach the same quasi-norm
/// Nyquist radius (32).
fn base(seed: u64) -> LabConfig {
    LabConfig {
        grid: GridConfig {
            dims: vec![64, 64],
            frequency_step: Some(vec![1.0, 32.0]),
        },
        anisotropy: AnisotropyConfig::diagonal_blocks(&[vec![1.0], vec![2.0]]),
        space: SpaceConfig {
            s: 1.0,
            p: vec![2.0, 2.0],
            q: 2.0,
            weights: None,
        },
        bank: BankConfig::default(),
        family: FamilySpec {
            seed,
            count: 50,
            band: BandSpec::Annulus { lo: 4.0, hi: 8.0 },
            axis_floor: None,
            channels: 1,
            real: true,
            dilations: vec![0, 1],
            modulations: Vec::new(),
            include_zero: true,
        },
        thresholds: Thresholds::default(),
        refine: true,
        difference: DifferenceConfig::default(),
        scaling: ScalingConfig::default(),
        lifting: LiftingConfig::default(),
        peetre: PeetreConfig::default(),
        comparison_bank: BankConfig { gamma: 1.0, delta: 1.5 },
    }
}

pub fn preset(theorem: Theorem) -> LabConfig {
    preset_with_seed(theorem, DEFAULT_SEED)
}

pub fn preset_with_seed(theorem: Theorem, seed: u64) -> LabConfig {
    let mut c = base(seed);
    match theorem {
        Theorem::Intersection => {
            // Keep every mode off the low-pass zone of both one-block banks.
            c.family.axis_floor = Some(vec![2.0, 1.0]);
        }
        Theorem::Difference => {}
        Theorem::Scaling => {
            // Nyquist radius 64 keeps the lambda = 2 bank covering the
            // dilated band; the fine first-axis step spreads the band over
            // many non-dyadic quasi-norm values.
            c.grid = GridConfig {
                dims: vec![256, 512],
                frequency_step: Some(vec![0.5, 16.0]),
            };
            c.family.count = 30;
            c.family.band = BandSpec::Annulus { lo: 2.0, hi: 4.0 };
            c.family.dilations = vec![0, 2];
            c.thresholds.spread_max = 2.0;
        }
        Theorem::Lifting => {
            // Away from p = 2 so that refinement exercises the quadrature.
            c.space.s = 0.5;
            c.space.p = vec![1.5, 3.0];
            c.family.band = BandSpec::Annulus { lo: 2.0, hi: 8.0 };
            c.thresholds.spread_max = 4.0;
        }
        Theorem::Fubini => {
            c.space.p = vec![3.0, 3.0];
            c.space.q = 3.0;
            c.family.count = 100;
            c.family.dilations = vec![0];
            c.refine = false;
        }
        Theorem::Duality => {
            c.space.s = 0.5;
            c.space.p = vec![1.5, 3.0];
            c.family.count = 200;
            c.family.dilations = vec![0];
            c.family.band = BandSpec::Annulus { lo: 1.0, hi: 16.0 };
        }
        Theorem::Peetre => {
            c.family.count = 30;
            c.family.dilations = vec![0];
            c.family.band = BandSpec::Box { radii: vec![8.0, 8.0] };
            c.peetre = PeetreConfig {
                r: Some(vec![2.0, 2.0]),
                radii: Some(vec![8.0, 8.0]),
            };
        }
        Theorem::Banks => {
            c.space.p = vec![3.0, 1.5];
            c.family.band = BandSpec::Annulus { lo: 2.0, hi: 8.0 };
            c.thresholds.spread_max = 4.0;
        }
    }
    c
}
