"""Energy pumped into shell 0 races to the small scales.

A finite truncation cannot blow up, so the run is stopped when the H^{5/6}
norm grows fifty-fold. This script shows that the stopping time settles as
the truncation grows and stays under the a-priori bound, and that energy is
accounted for along the way.

Run with ``python3 demos/cascade_and_truncation.py``.
"""

import numpy as np

from dyadic import (DEFAULT_LAMBDA, BlowupSurrogate, DiagnosticsConfig, ModelParams,
                    SolverOptions, decay_check, detect_crossing, energy_balance_audit,
                    integrate, sobolev_norm)
from dyadic.analysis import blowup_bound

LAM = DEFAULT_LAMBDA
F0 = LAM ** (-1 / 3)
OPTS = SolverOptions(rel_tol=1e-10, abs_tol=1e-14, record_every=1e-3)


def run(n):
    a0 = LAM ** -np.arange(n + 1.0)
    sur = BlowupSurrogate(50 * sobolev_norm(a0, 5 / 6))
    tr = integrate(ModelParams(n, [F0]), a0, 1.0, OPTS, stop_when=sur,
                   diagnostics=DiagnosticsConfig(box_shells=(1, 5, 10)))
    return tr, detect_crossing(tr, sur)


def main():
    print(" N   crossing   bound    balance defect")
    for n in (12, 16, 20, 24):
        tr, sur = run(n)
        bound = blowup_bound(float(np.linalg.norm(tr.states[0] - tr.reference)))
        print(f"{n:2d}   {sur.crossing_time:.5f}   {bound:.4f}   {energy_balance_audit(tr):.1e}")

    tr, sur = run(20)
    print("\nAt N = 20 the energy beyond shell J only ever grows before the crossing:")
    for J in (1, 5, 10):
        box = tr.column(f"box:{J}")
        print(f"  J = {J:2d}: {box[0]:.3e} -> {box[-1]:.3e}, "
              f"smallest step {np.min(np.diff(box)):+.1e}")

    rep = decay_check(tr, tr.reference, 0.02, sur.threshold)
    print(f"\nDistance to the fixed point shrinks at least at the guaranteed rate in "
          f"{rep.pass_fraction:.0%} of {len(rep.windows)} windows of width 0.02.")


if __name__ == "__main__":
    main()
