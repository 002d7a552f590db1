//! Unitary discrete Fourier transforms and the 1-level undecimated Haar
//! wavelet transform.

mod fft;
mod swt;

pub use fft::{dft1, dft2, ComplexGrid, Fft1, Fft2};
pub use swt::{
    swt1_forward, swt1_inverse, swt2_forward, swt2_inverse, SubbandSet, Subband, SwtCoeffs1D,
    SwtCoeffs2D, SwtDomain,
};

pub use num_complex::Complex64;
