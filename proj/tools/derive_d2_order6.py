#!/usr/bin/env python3
"""Derive the boundary elements of the order-6 variable-coefficient D2.

M^(c) = sum_k c_k M^(k) with M^(k) = H_k d_k d_k^T + R^(k), d_k row k of D1.
The six left boundary elements (9x9) are found by a semidefinite program:
  minimize sum_k trace R^(k)
  s.t. zero row sums, boundary rows exact for c = x^a, u = x^b with a + b <= 4,
       R^(k) x^j = 0 for j <= 3, R^(k) >= delta on the complement.
Minimal damping alone leaves boundary-trapped eigenmodes with low frequency,
so the program is re-solved with cuts v^T M v >= tau v^T H v on every trapped
mode found in the Neumann spectra of a range of grids until none remain.

Requires numpy, scipy, cvxpy (Clarabel). Writes src/sbp_coefficients.cpp.
"""
import argparse
import numpy as np
import scipy.linalg as sl
import cvxpy as cp

HB = [13649 / 43200, 12013 / 8640, 2711 / 4320, 5359 / 4320, 7877 / 8640, 43801 / 43200]
ROWS = {
    0: (range(0, 6), [-1.582533518939116418785258993332844897062, 2.033426786468126253898161347360808173712,
                      -0.1417052898146741610733887894481170575600, -0.4501096599735708523162117824920488989702,
                      0.1042956382142412661862395105494407610836, 0.03662604404499391209045870736276191879693]),
    1: ([-1, 1, 2, 3, 4], [-0.4620701275035953590186631853846278325646, 0.2873679417026202568532985205129449923126,
                           0.2585974499280928196267362923074433487080, -0.06894808744606961472005221923058251153103,
                           -0.01494717668104810274131940820517799692506]),
    2: ([-2, -1, 1, 2, 3], [0.07134398748360337973038301686379010397038, -0.6366933020423417826592908754928085932593,
                            0.6067199374180168986519150843189505198519, -0.02338660408468356531858175098561718651857,
                            -0.01798401877459493040442547470431484404443]),
    3: ([-3, -2, -1, 1, 2, 3], [0.1146397975178068401430112823144985150596, -0.2898424301162697370942324201800071793273,
                                -0.3069262456316931913128086944558079603132, 0.5203848121857539166740071338174418292578,
                                -0.05169127637022742348368508279860701098408, 0.01343534241462959507370778130248180630715]),
    4: ([-4, -3, -2, -1, 1, 2, 3], [-0.03614399304268576976452921364705641609825, 0.1051508663818248421520867474440761344449,
                                    0.01609777419666805778308369351834662756172, -0.7080721616106272031118456849378369336023,
                                    0.7692160858661111736140494493705980473867, -0.1645296432652024882569506157166433921544,
                                    0.01828107147391138758410562396851593246160]),
    5: ([-5, -4, -3, -2, -1, 1, 2, 3], [-0.01141318406360863692889821914555232596651, 0.02049729840293952857599941220163960606616,
                                        0.01113095018331244864875173213474522093204, 0.06324365883611076515355091406993789453750,
                                        -0.6916640154753724474963890679085181638850, 0.7397091390607520376247117645715851236273,
                                        -0.1479418278121504075249423529143170247255, 0.01643798086801671194721581699047966941394]),
}
DINT = [-1 / 60, 3 / 20, -3 / 4, 0, 3 / 4, -3 / 20, 1 / 60]
# interior element (rational, unique under the exactness and positivity conditions)
MINT = np.array([[1 / 180, -1 / 40, 1 / 20, -11 / 360, 0, 0, 0],
                 [-1 / 40, 1 / 8, -3 / 10, 7 / 40, 1 / 40, 0, 0],
                 [1 / 20, -3 / 10, 19 / 20, -17 / 40, -3 / 10, 1 / 40, 0],
                 [-11 / 360, 7 / 40, -17 / 40, 101 / 180, -17 / 40, 7 / 40, -11 / 360],
                 [0, 1 / 40, -3 / 10, -17 / 40, 19 / 20, -3 / 10, 1 / 20],
                 [0, 0, 1 / 40, 7 / 40, -3 / 10, 1 / 8, -1 / 40],
                 [0, 0, 0, -11 / 360, 1 / 20, -1 / 40, 1 / 180]])
DL = [-25 / 12, 4, -3, 4 / 3, -1 / 4]
NB, S = 6, 9
IU = [(a, b) for a in range(S) for b in range(a, S)]
NV = NB * len(IU)


def d1h(n):
    H = np.ones(n)
    H[:6] = HB
    H[-6:] = H[:6][::-1]
    D = np.zeros((n, n))
    for i in range(6, n - 6):
        D[i, i - 3:i + 4] = DINT
    for r, (offs, vals) in ROWS.items():
        cols = list(offs) if r == 0 else [r + o for o in offs]
        for c, v in zip(cols, vals):
            D[r, c] = v
            D[n - 1 - r, n - 1 - c] = -v
    return H, D


def var(j, a, b):
    a, b = min(a, b), max(a, b)
    return j * len(IU) + IU.index((a, b))


def equality_constraints(maxdeg=4, kernel=3):
    n = 30
    H, D = d1h(n)
    x = np.arange(n, dtype=float)
    dl = np.zeros(n)
    dl[:5] = DL
    A, y = [], []
    for j in range(NB):
        for a in range(S):
            row = np.zeros(NV)
            for b in range(S):
                row[var(j, a, b)] += 1
            A.append(row)
            y.append(0.0)
    for al in range(maxdeg + 1):
        for be in range(1, maxdeg + 1 - al):
            c, u = x ** al, x ** be
            exact = be * (al + be - 1) * x ** (al + be - 2) if al + be >= 2 else 0 * x
            fixed = np.zeros(n)
            for j in range(NB, n // 2):
                fixed[j - 3:j + 4] += c[j] * (MINT @ u[j - 3:j + 4])
            for i in range(S):
                row = np.zeros(NV)
                for j in range(NB):
                    for k in range(S):
                        row[var(j, i, k)] -= c[j] * u[k]
                A.append(row)
                y.append(H[i] * exact[i] + fixed[i] + (c[0] * (dl @ u) if i == 0 else 0))
    xs = np.arange(S, dtype=float)
    for j in range(NB):
        dj = D[j, :S]
        for k in range(kernel + 1):
            vk = xs ** k
            for a in range(S):
                row = np.zeros(NV)
                for b in range(S):
                    row[var(j, a, b)] += vk[b]
                A.append(row)
                y.append(H[j] * dj[a] * (dj @ vk))
    return np.array(A), np.array(y), D


def elements(v):
    Mb = np.zeros((NB, S, S))
    for j in range(NB):
        for k, (a, b) in enumerate(IU):
            Mb[j, a, b] = Mb[j, b, a] = v[j * len(IU) + k]
    return Mb


def assemble(Mb, n, c):
    M = np.zeros((n, n))
    for j in range(n):
        if j < NB:
            M[:S, :S] += c[j] * Mb[j]
        elif j >= n - NB:
            M[n - S:, n - S:] += c[j] * Mb[n - 1 - j][::-1, ::-1]
        else:
            M[j - 3:j + 4, j - 3:j + 4] += c[j] * MINT
    return M


def quadratic_form(n, c, w):
    row = np.zeros(NV)
    const = 0.0
    for j in range(NB):
        for ww, cj in ((w, c[j]), (w[::-1], c[n - 1 - j])):
            ws = ww[:S]
            for k, (a, b) in enumerate(IU):
                row[j * len(IU) + k] += cj * ws[a] * ws[b] * (1 if a == b else 2)
    for j in range(NB, n - NB):
        const += c[j] * (w[j - 3:j + 4] @ MINT @ w[j - 3:j + 4])
    return row, const


def trapped_modes(Mb, tau, grids, amps):
    out = []
    for n in grids:
        H, _ = d1h(n)
        s = 1 / np.sqrt(H)
        for amp in amps:
            c = 1 + amp * np.sin(3 * np.arange(n) / (n - 1))
            ev, U = np.linalg.eigh(s[:, None] * assemble(Mb, n, c) * s[None, :])
            W = s[:, None] * U
            for i in range(n):
                if ev[i] > tau:
                    break
                e = H * W[:, i] ** 2
                if e[:8].sum() + e[-8:].sum() > max(0.6, 48 / n):
                    out.append((n, c, W[:, i], H))
    return out


def derive(tau, delta, verbose=True):
    A, y, D = equality_constraints()
    H30 = d1h(30)[0]
    s0 = np.linalg.lstsq(A, y, rcond=None)[0]
    Nn = sl.null_space(A)
    xs = np.arange(S, dtype=float)
    P = sl.null_space(np.vstack([xs ** k for k in range(4)]))
    cuts = []
    grids, amps = list(range(25, 80, 2)), [0.0, 0.6, -0.4]
    for it in range(50):
        z = cp.Variable(Nn.shape[1])
        v = s0 + Nn @ z
        cons, Rs = [], []
        for j in range(NB):
            M = cp.vstack([cp.hstack([v[var(j, a, b)] for b in range(S)]) for a in range(S)])
            R = M - H30[j] * np.outer(D[j, :S], D[j, :S])
            Rs.append(R)
            Rr = P.T @ R @ P
            cons.append((Rr + Rr.T) / 2 >> delta * np.eye(P.shape[1]))
        cons += [row @ v + const >= rhs for row, const, rhs in cuts]
        prob = cp.Problem(cp.Minimize(sum(cp.trace(R) for R in Rs)), cons)
        prob.solve(solver="CLARABEL")
        if v.value is None:
            raise SystemExit(f"infeasible ({prob.status})")
        vv = v.value
        vv = vv - np.linalg.lstsq(A, A @ vv - y, rcond=None)[0]  # polish onto the equalities
        modes = trapped_modes(elements(vv), tau, grids, amps)
        if verbose:
            print(f"round {it}: trace {prob.value:.4f}, trapped modes {len(modes)}")
        if not modes:
            return elements(vv), A, y, vv
        for n, c, w, H in modes:
            row, const = quadratic_form(n, c, w)
            cuts.append((row, const, tau * (H * w * w).sum()))
    raise SystemExit("cutting planes did not converge")


def report(Mb, A, y, vv):
    H, D = d1h(30)
    print("equality residual", np.abs(A @ vv - y).max())
    for j in range(NB):
        R = Mb[j] - H[j] * np.outer(D[j, :S], D[j, :S])
        print(f"element {j}: min eig R {np.linalg.eigvalsh(R).min():.2e}")
    n = 60
    rho = np.abs(np.linalg.eigvals(np.diag(1 / d1h(n)[0]) @ assemble(Mb, n, np.ones(n)))).max()
    print(f"spectral radius of D2 (h = 1): {rho:.4f}")


def emit(Mb, path):
    with open(path, "w") as f:
        f.write('#include "sbp_coefficients.hpp"\n\nnamespace shapeopt::coeffs {\n\n')
        f.write("// Generated by tools/derive_d2_order6.py.\n")
        f.write("const double kD2Order6Boundary[6][9][9] = {\n")
        for j in range(NB):
            f.write("    {\n")
            for a in range(S):
                f.write("        {" + ", ".join(repr(float(x)) for x in Mb[j, a]) + "},\n")
            f.write("    },\n")
        f.write("};\n\n}  // namespace shapeopt::coeffs\n")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--tau", type=float, default=0.8)
    ap.add_argument("--delta", type=float, default=1e-4)
    ap.add_argument("--out", default="src/sbp_coefficients.cpp")
    args = ap.parse_args()
    Mb, A, y, vv = derive(args.tau, args.delta)
    report(Mb, A, y, vv)
    emit(Mb, args.out)
