"""Entropy of the initial market states.

Every state in the family rho_0(theta) has the same price law, yet its von
Neumann entropy runs from zero (pure) to the Shannon entropy of the law
(classical).  Run with ``python demos/01_entropy_of_initial_states.py``.
"""
# %%
import numpy as np

from marketoqs import observables as obs
from marketoqs.scenarios import InitialStateSpec, build_initial_state, initial_entropy_curve

# %% [markdown]
# A three-level toy market first: a classical state and a pure superposition
# with the same outcome probabilities.

# %%
p = np.array([0.25, 0.5, 0.25])
classical = np.diag(p)
v = np.array([1.0, 0.0, 1.0]) / np.sqrt(2)
quantum = 0.5 * np.outer(v, v) + 0.5 * np.diag([0.0, 1.0, 0.0])
print(f"H(classical) = {obs.von_neumann_entropy(classical):.4f}")
print(f"H(quantum)   = {obs.von_neumann_entropy(quantum):.4f}")

# %% [markdown]
# Now the full 1001-level grid.  The diagonal is identical for every theta.

# %%
thetas = np.linspace(0.0, 1.0, 11)
for theta, h in initial_entropy_curve(thetas):
    print(f"theta={theta:4.2f}  H={h:.6f}")

st = build_initial_state(InitialStateSpec(theta=0.3))
print("Shannon entropy of the price law:", round(obs.shannon_entropy(st.probabilities), 6))
print("pinching raises entropy:",
      obs.von_neumann_entropy(obs.pinch_diagonal(st)) >= obs.von_neumann_entropy(st))
