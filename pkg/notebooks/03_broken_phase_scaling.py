# %% [markdown]
# # Highest state: broken phase and finite-size scaling
#
# For the highest state the separatrix is a true transition line. Deep in
# the broken phase the top two levels form a tunnelling doublet. Keeping the
# partner term ("exact") gives the metric of the symmetric superposition.
# Dropping it ("resolved") gives the localized state, which the Gaussian
# description reproduces.

# %%
import numpy as np

from lmg_geometry.analysis import (Curve, CutSpec, fit_model, point_value, scaling_study,
                                   separatrix_window)
from lmg_geometry.holstein_primakoff import hp_broken_metric
from lmg_geometry.qgt import qgt_perturbative
from lmg_geometry.semiclassical import omega_xc
from lmg_geometry.spin import ModelParams

XI = 2.3
print(f"omega_xc({XI}) = {omega_xc(XI):.4f}")

# %% [markdown]
# ## Doublet policies against the Gaussian metric at j = 96

# %%
for ox in (1.0, 2.0, 3.0):
    p = ModelParams(ox, XI)
    ex = qgt_perturbative(96, p, "highest")
    res = qgt_perturbative(96, p, "highest", doublet="resolved")
    hp = hp_broken_metric(96, p)
    print(f"omega_x={ox}: g11 exact {ex.g11:9.3f} resolved {res.g11:.4f} Gaussian {hp.g11:.4f}; "
          f"g22 {res.g22:.4f} vs {hp.g22:.4f} (digits used {ex.precision_digits})")

# %% [markdown]
# ## Curvature plateaus
#
# R is close to 0 deep in the broken phase and close to -4 far on the
# symmetric side.

# %%
for ox in (1.0, 6.5):
    print(f"R(omega_x={ox}) = {point_value(96, ModelParams(ox, XI), 'R', 'highest'):+.4f}")

# %% [markdown]
# ## Finite-size scaling
#
# A reduced j-list keeps this script to about a minute. The test suite runs
# the full list up to j = 512.

# %%
j_list = [32, 48, 64, 96, 128]
cut = CutSpec("omega_x", XI, separatrix_window(XI), zoom=1)
rows = scaling_study(j_list, cut, "g22")
for j, x, v in rows:
    print(f"j={j:4.0f}  g22 peak {v:9.3f} at omega_x = {x:.4f}")
fit = fit_model(Curve([r[0] for r in rows], [r[2] for r in rows]), "loglog")
print(f"log g22_max = {fit.parameters[0]:.3f} + {fit.parameters[1]:.3f} log j")

# %%
rows = scaling_study(j_list, CutSpec("point", 0.5, 0.0), "R")
fit = fit_model(Curve([r[0] for r in rows], [r[2] for r in rows]), "offset_power_sq")
print("R(0, 0.5):", ", ".join(f"{v:.4f}" for _, _, v in rows))
print(f"asymptote {fit.parameters[0]:.3f}")
