//! Objective acoustic metrics: mel front end, RT60 via Schroeder
//! integration, RT60 error and mel cepstral distortion.

pub mod cepstrum;
pub mod decay;
pub mod dtw;
pub mod fft;
pub mod spectral;
mod waveform;

pub use cepstrum::{dct2_ortho, mel_cepstrum, CepstraSequence};
pub use decay::{rt60, rt60_estimate, rte, schroeder_edc, synth_decay, DecayCurve, Rt60Config};
pub use dtw::{dtw_align, mcd, mcd_waveforms, waveform_cepstra, Alignment, McdConfig, MCD_SCALE};
pub use fft::{fft_in_place, Complex};
pub use spectral::{
    hann, hz_to_mel, mel_filterbank, mel_spectrogram, mel_to_hz, stft, MelConfig, MelSpectrogram,
    Spectrogram, StftConfig, MEL_FLOOR,
};
pub use waveform::Waveform;
