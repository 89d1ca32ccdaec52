//! Shared fixtures for the criterion benches.

use chaoskey::maps::henon;
use chaoskey::testimage::moon_standin;
use chaoskey::{CipherConfig, GrayImage, Key, Trajectory};

pub fn henon_trajectory(n: usize) -> Trajectory {
    henon(1.4, 0.3).unwrap().iterate(&[0.1, 0.1], n, 0).unwrap()
}

pub fn image(side: usize) -> GrayImage {
    moon_standin(side, side, 1)
}

pub fn henon_config(rounds: usize) -> CipherConfig {
    CipherConfig::new(henon(1.4, 0.3).unwrap(), Key::new(vec![0.2, 0.3]).unwrap(), rounds).unwrap()
}
