//! CSV writers. Floats are written with 17 significant digits so a value
//! read back is bit-identical.

use std::io::{self, Write};

use crate::dynamics::SmoothingProfile;
use crate::spectrum::Spectrum;
use crate::superop::Trajectory;

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory<W: Write>(out: &mut W, trajectory: &Trajectory) -> io::Result<()> {
    writeln!(out, "n,norm")?;
    for p in &trajectory.points {
        writeln!(out, "{},{}", p.step, float(p.norm))?;
    }
    Ok(())
}

pub fn write_spectrum<W: Write>(out: &mut W, spectrum: &Spectrum) -> io::Result<()> {
    writeln!(out, "re,im,modulus,multiplicity")?;
    for c in &spectrum.clusters {
        writeln!(
            out,
            "{},{},{},{}",
            float(c.value.re),
            float(c.value.im),
            float(c.value.norm()),
            c.multiplicity
        )?;
    }
    Ok(())
}

pub fn write_smoothing<W: Write>(out: &mut W, profile: &SmoothingProfile) -> io::Result<()> {
    writeln!(out, "n,delta,S")?;
    for (row, &n) in profile.values.iter().zip(&profile.steps) {
        for (&delta, &s) in profile.deltas.iter().zip(row) {
            writeln!(out, "{},{},{}", n, float(delta), float(s))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }
}
