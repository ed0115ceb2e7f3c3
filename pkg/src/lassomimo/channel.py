"""Rayleigh channel generation and the complex-to-real model conversion.

The complex link is y~ = H~ x~ + n~ with H~ entries i.i.d. CN(0, 1) and
noise CN(0, sigma^2). Detection runs on the equivalent real model
y = H x + v, where H is the 2Nr x 2Nt block matrix
[[Re H~, -Im H~], [Im H~, Re H~]], x stacks [Re x~; Im x~] and each real
noise component has variance sigma^2 / 2.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ComplexChannel:
    """One realization of the complex flat-fading link."""

    gains: np.ndarray  # (Nr, Nt) complex
    noise_var: float  # complex noise variance sigma^2 per receive antenna

    @property
    def n_tx(self):
        return self.gains.shape[1]

    @property
    def n_rx(self):
        return self.gains.shape[0]


@dataclass(frozen=True)
class RealSystemModel:
    """The stacked real-valued system a detector consumes."""

    H: np.ndarray  # (2Nr, 2Nt)
    y: np.ndarray  # (2Nr,)
    noise_var_real: float  # sigma^2 / 2 per real component

    @property
    def n_symbols(self):
        """Number of real PAM symbols to detect, 2Nt."""
        return self.H.shape[1]


def draw_channel(n_tx, n_rx, rng, noise_var=0.0):
    """Draw an (n_rx, n_tx) channel with unit-variance CN(0, 1) entries."""
    if n_tx < 1 or n_rx < 1:
        raise ValueError("antenna counts must be >= 1")
    gains = (
        rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))
    ) / np.sqrt(2.0)
    return ComplexChannel(gains=gains, noise_var=float(noise_var))


def transmit(channel, x_complex, rng):
    """Propagate complex symbols through the channel and add receiver noise."""
    x_complex = np.asarray(x_complex)
    noise = np.sqrt(channel.noise_var / 2.0) * (
        rng.standard_normal(channel.n_rx) + 1j * rng.standard_normal(channel.n_rx)
    )
    return channel.gains @ x_complex + noise


def complex_to_real_matrix(gains):
    """Expand a complex matrix to its 2x-size real block form."""
    return np.block([[gains.real, -gains.imag], [gains.imag, gains.real]])


def stack_complex(v):
    """Stack a complex vector as [Re; Im]."""
    v = np.asarray(v)
    return np.concatenate([v.real, v.imag])


def unstack_real(x):
    """Inverse of :func:`stack_complex`: first half real part, second half imaginary."""
    x = np.asarray(x, dtype=float)
    half = x.size // 2
    return x[:half] + 1j * x[half:]


def to_real(channel, y_complex):
    """Convert a complex channel and received vector to the real system model."""
    y_complex = np.asarray(y_complex)
    if y_complex.shape[0] != channel.n_rx:
        raise ValueError(
            f"received vector length {y_complex.shape[0]} != Nr={channel.n_rx}"
        )
    return RealSystemModel(
        H=complex_to_real_matrix(channel.gains),
        y=stack_complex(y_complex),
        noise_var_real=channel.noise_var / 2.0,
    )


def noise_var_for_snr(snr_db, n_tx, symbol_energy):
    """Complex noise variance realizing the requested average received SNR.

    Convention: SNR = Nt * Es / sigma^2, the average received signal-to-noise
    ratio per receive antenna under unit-variance channel entries. This is the
    x-axis convention for every BER curve this package produces.
    """
    return n_tx * symbol_energy / 10.0 ** (snr_db / 10.0)
