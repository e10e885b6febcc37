"""Independent high-accuracy integration of the closed density systems.

Uses scipy's adaptive DOP853 at tight tolerances, transcribed separately from
the C++ right-hand side. Printed values are frozen into tests/test_ode.cpp.

    python3 ode_limits.py
"""
import numpy as np
from scipy.integrate import solve_ivp


def rhs(t, y, screening):
    d0, d1, d2, d3, f0, f1, f2, r, d010 = y
    e = np.exp(-t)
    if not screening:
        first = (f0 + f2) ** 2 * e
        df0 = -(f0 + f1 + f2) * e
        df1 = (f0 + f2) * e - r
    else:
        first = f0 * f0 * e
        df0 = -(f0 + f1) * e
        df1 = f0 * e - r
    second = (2 * f0 * f1 + f1 * f1) * e
    return [-first - second, first - d010, second, d010,
            df0, df1, f1 * e,
            f0 * (e - t * e * e) - f1 * t * e * e - r,
            f0 * f0 * e - d010 - 2 * r * f0 * e - 2 * r * f1 * e]


if __name__ == "__main__":
    for screening in (False, True):
        sol = solve_ivp(rhs, [0, 30], [1, 0, 0, 0, 1, 0, 0, 0, 0], args=(screening,),
                        method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
        y = sol.y[:, -1]
        line1, line2 = y[1] + y[3], y[2] + y[3]
        print("screening" if screening else "noscreening",
              f"line1={line1:.15g} line2={line2:.15g} factor={line2 / line1:.15g}")
        y1 = sol.sol(1.0)
        print("  t=1:", " ".join(f"{v:.15g}" for v in y1))
