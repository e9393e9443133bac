"""Regenerate oracle_values.json.

Uses only the standard library and closed forms written out by hand; nothing
from qsphere is imported, so the frozen numbers are an independent reference.
Run once, inspect, commit.  Tests only read the JSON.
"""
import json
import math
from pathlib import Path


def br(n, q):
    return (q ** n - q ** -n) / (q - 1 / q)


def lam_pm(r):
    if r == math.inf:
        return 1.0, -1.0
    d = math.sqrt(r + 0.25)
    return 0.5 + d, 0.5 - d


def gammas(q, r):
    lp, lm = lam_pm(r)
    if r == 0:
        return 1 - q * q, 0.0
    return (1 - q * q) * lp / (lp - lm), (1 - q * q) * lm / (lm - lp)


def main():
    out = {}
    # Haar state on O(SU_q(2)): with a = alpha, b = -q gamma^*, c = gamma the
    # classical moments h((gamma^* gamma)^n) = (1-q^2)/(1-q^(2n+2)) give h((bc)^n).
    out["haar_bc_powers"] = {
        str(q): [(-q) ** n * (1 - q * q) / (1 - q ** (2 * n + 2)) for n in range(5)]
        for q in (0.5, 0.3)
    }
    out["haar_ad"] = {str(q): 1 / (1 + q * q) for q in (0.5, 0.3)}

    # eigenvalues of the right X_r action on u_j at q=1/2, r=2 (lam_+ = 2, lam_- = -1)
    q, r = 0.5, 2.0
    lp, lm = lam_pm(r)
    mu = {}
    for n in range(-3, 4):
        j = n / 2
        mu[f"{n}/2"] = q ** 0.5 / (1 / q - q) / math.sqrt(r) * (1 - q ** (-2 * j) * lm - q ** (2 * j) * lp)
    out["mu_q1/2_r2"] = mu

    # invariant state of A: sum over both spectral branches
    res = {}
    for r in (1.0, 2.0, 0.0):
        q = 0.5
        gp, gm = gammas(q, r)
        lp, lm = lam_pm(r)
        if r == 0:
            lp, lm = 1.0, 0.0
        res[str(r)] = (gp * lp + gm * lm) / (1 - q ** 4)
    out["state_of_A_q1/2"] = res

    # the nonvanishing value h(E |> B chi_+(A))
    out["counterexample_q1/2"] = {}
    for r in (1.0, 2.0):
        q = 0.5
        gp, _ = gammas(q, r)
        _, lm = lam_pm(r)
        out["counterexample_q1/2"][str(r)] = q ** 0.5 / (1 - q * q) * gp * lm

    # beta0 at the lowest spin and the CG expectation
    out["beta0_lowest"] = {}
    out["cg_expectation"] = {}
    for r in (1.0, 0.0, math.inf):
        for q in (0.5, 0.3):
            lp, lm = lam_pm(r)
            if r == 0:
                lp, lm = 1.0, 0.0
            for j2 in (1, 2, 3):
                j = j2 / 2
                for sgn in (1, -1):
                    if r == 0 and sgn < 0:
                        continue
                    a, b = (lp, lm) if sgn > 0 else (lm, lp)
                    if r == math.inf:
                        beta = sgn / q * br(2, q) * br(2 * j, q) / br(2 * j + 2, q)
                    else:
                        beta = br(2 * j, q) * (a / q ** 2 - b) / br(2 * j + 2, q)
                    key = f"r={r},q={q},j={j2}/2,{'+' if sgn > 0 else '-'}"
                    out["beta0_lowest"][key] = beta
                    out["cg_expectation"][key] = (br(2 * j + 2, q) * br(2 * j - 1, q)
                                                  / br(2 * j + 1, q) / br(2 * j, q) * beta)

    # sigma at r = inf: B weights (1-q^(4n))^(1/2)
    out["sigma_inf_B_q1/2"] = [math.sqrt(1 - 0.5 ** (4 * n)) for n in range(1, 6)]
    Path(__file__).with_name("oracle_values.json").write_text(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
