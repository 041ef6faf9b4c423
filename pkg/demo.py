import sys
import os

# Ensure src is in path
sys.path.append(os.path.join(os.path.dirname(__file__), "src"))

from tensormeans import (
    NotPositiveDefiniteError,
    RandomPDSource,
    ToleranceConfig,
    Weights,
    check_ah_karcher,
    check_ah_power,
    from_diagonal,
    identity,
    karcher_mean,
    kantorovich,
    markov_tail_bound,
    positive_definite,
    power_mean,
)
from tensormeans.bounds import inverted_orderings
from tensormeans.sampling import draw_inputs

# --- 1. Guarded statistics ---

@positive_definite("tensors", on_violation="log")
def trace_sum_audit_only(tensors):
    return sum(float(A.entries.trace().real) for A in tensors)

def allow_small_negative(func_name, label, lam):
    print(f"   [policy] {func_name} got {label} with smallest eigenvalue {lam:.3g}")
    return lam > -1e-3

@positive_definite("tensors", on_violation=allow_small_negative)
def trace_sum_with_policy(tensors):
    return sum(float(A.entries.trace().real) for A in tensors)

# --- 2. Inputs ---

source = RandomPDSource.spectral_uniform((2, 2), m=1.0, M=2.0, root_seed=42)
inputs = draw_inputs(source, trial=0, k=3)
weights = Weights.uniform(3)

# --- 3. Run ---

def run_demo():
    print("============================================")
    print("  TENSORMEANS DEMO")
    print("============================================")

    print("\n--- 1. Karcher and power means ---")
    G, diagnostics = karcher_mean(weights, inputs)
    print(f"Karcher mean converged in {diagnostics.iterations} iterations, residual {diagnostics.residual_norm:.2e}")
    for q in (0.5, 0.125):
        P, diagnostics = power_mean(weights, q, inputs)
        print(f"P_q for q={q}: {diagnostics.iterations} iterations")

    print("\n--- 2. Ando-Hiai checks ---")
    for p in (0.5, 2.0):
        lower, upper = check_ah_karcher(p, weights, inputs)
        print(f"p={p}: lower holds={lower.holds} margin={lower.margin:.3e}, upper holds={upper.holds} margin={upper.margin:.3e}")
    plus, minus = check_ah_power(2.0, 0.5, weights, inputs)
    print(f"power chain q=+0.5 holds={plus.holds}, q=-0.5 holds={minus.holds}")

    print("\n--- 3. Negative control ---")
    with inverted_orderings():
        lower, _ = check_ah_karcher(2.0, weights, inputs)
    print(f"inverted lower chain holds={lower.holds} (expected False)")

    print("\n--- 4. Kantorovich constants ---")
    for p in (2.0, 3.0, -1.0):
        print(f"K(2, 1, {p}) = {kantorovich(2.0, 1.0, p):.6f}")

    print("\n--- 5. Markov tail bound ---")
    report = markov_tail_bound(source, lambda A: A[0], identity((2, 2)) * 1.8, n=500)
    print(f"Pr[X not <= C] = {report.empirical_prob:.3f} +/- {report.mc_stderr:.3f}, bound {report.trace_bound:.3f}")

    print("\n--- 6. Looser tolerances for one block ---")
    with ToleranceConfig(fixed_point_tol=1e-8).activate():
        _, diagnostics = power_mean(weights, 0.5, inputs)
    print(f"P_0.5 with fixed_point_tol=1e-8: {diagnostics.iterations} iterations")

    print("\n--- 7. Positive-definite guard ---")
    bad = [from_diagonal([1.0, -1e-4]), from_diagonal([2.0, 3.0])]
    print(f"audit mode: trace sum = {trace_sum_audit_only(bad):.4f}")
    print(f"policy mode: trace sum = {trace_sum_with_policy(bad):.4f}")
    try:
        trace_sum_with_policy([from_diagonal([1.0, -1.0])])
    except NotPositiveDefiniteError as e:
        print(f"REJECTED: {e}")

if __name__ == "__main__":
    run_demo()
