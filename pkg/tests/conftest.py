"""Shared oracles; collects the acceptance verdicts for the terminal summary."""

import numpy as np
from scipy import integrate

from shapegen import farfield as ff

ACCEPTANCE_LINES: dict[int, str] = {}


def report(number: int, passed: bool, detail: str) -> bool:
    line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])


def numeric_cross(xi1, mu, a):
    # int_{-a/2}^{a/2} exp(i 2 pi (xi1 - mu) y / a) dy  (the other axes integrate to a^(d-1))
    w = 2 * np.pi * (xi1 - mu) / a
    re, _ = integrate.quad(lambda y: np.cos(w * y), -a / 2, a / 2, epsabs=1e-13, epsrel=1e-13, limit=200)
    im, _ = integrate.quad(lambda y: np.sin(w * y), -a / 2, a / 2, epsabs=1e-13, epsrel=1e-13, limit=200)
    return complex(re, im)


def synthetic_generator(adm, coeff):
    """Generator whose source is the band-limited ``sum c_xi phi_xi`` on V0.

    ``I(w) = int_V0 f e^{-i w.y} dy``: for lattice ``w`` this is ``a^d c_xi``;
    the shifted zero sample picks up every ``xi`` with zero transverse part.
    """
    a, d, N, mu = adm.a, adm.d, adm.N, adm.mu
    flat = coeff.reshape(-1)
    I = a**d * flat.astype(complex)
    z0 = 0j
    for idx, xi in enumerate(adm.xi):
        if np.any(xi[1:]):
            continue
        z0 += flat[idx] * numeric_cross(xi[0], mu, a) * a ** (d - 1)
    I[adm.zero_index] = z0
    return ff.ShapeGenerator(adm, I * adm.constants())
