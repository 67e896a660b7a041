"""The stationary state of the forced model and the linear modes around it.

Run with ``python3 demos/fixed_point_and_spectrum.py``.
"""

import numpy as np

from dyadic import (DEFAULT_LAMBDA, ForcingSpec, ModelParams, characteristic_X,
                    eigenvector, find_eigenvalues, fixed_point_general,
                    fixed_point_single, kolmogorov_constants, residual, spectrum_fit)
from dyadic.spectral import scale_eigenvalue

LAM = DEFAULT_LAMBDA


def main():
    params = ModelParams(40, [1.0])
    fp = fixed_point_single(1.0, params)
    print("Forcing only shell 0 with f0 = 1 gives a geometric fixed point:")
    print(f"  a_0 = {fp.state[0]:.15f}, ratio a_(j+1)/a_j = {fp.state[1] / fp.state[0]:.6f}")
    print(f"  relative residual at N = 40: {residual(params, fp.state, relative=True):.1e}")

    fit = spectrum_fit(fp.state, (3, 16))
    k = kolmogorov_constants(1.0)
    print(f"Its shell energies fall off with log2-slope {fit.slope:.12f},")
    print(f"and the energy throughput is eps = {k.epsilon:.6f} with c0 = {k.c0:.6f}.")

    two = fixed_point_general(ForcingSpec((1.0, 0.5)), ModelParams(40, [1.0, 0.5]))
    print("\nAdding f1 = 0.5 bends the first two shells; the tail stays geometric.")
    print(f"  tail constant C = {two.tail_constant:.15f}, a_0 = {two.state[0]:.15f}")
    print("  first shells:", np.array2string(two.state[:5], precision=6))

    print("\nLinearising in the normalised frame (f0 = lam**(-1/3)):")
    print(f"  X(0) = {characteristic_X(0.0):.12f}, positive as expected")
    for mu in find_eigenvalues((-5.0, -0.1)):
        ev = eigenvector(mu, 40)
        print(f"  eigenvalue {mu:+.10f}, residual {ev.residual:.1e},"
              f" at f0 = 1 it becomes {scale_eigenvalue(mu, 1.0):+.6f}")
    print("  search over (0, 10] finds", find_eigenvalues((1e-6, 10.0)) or "no roots")


if __name__ == "__main__":
    main()
