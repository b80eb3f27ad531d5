# %% [markdown]
# # Ground-state quantum geometry
#
# The ground state lives near the classical minimum, which stays a regular
# point for xi_y >= 0. Its Holstein-Primakoff metric has constant scalar
# curvature R = -4, and the exact metric approaches it as j grows.

# %%
import numpy as np

from lmg_geometry.geometry import scalar_curvature_field
from lmg_geometry.holstein_primakoff import hp_ground_metric
from lmg_geometry.qgt import QgtField, qgt_mesh
from lmg_geometry.spin import ModelParams

# %% [markdown]
# ## Exact metric against the closed form along xi_y = 2.3

# %%
ox = np.linspace(-6, 6, 13)
f = qgt_mesh(120, ox, [2.3], "ground")
print(" omega_x     g11 num    g11 HP      g22 num    g22 HP")
for k, x in enumerate(ox):
    a = hp_ground_metric(120, ModelParams(x, 2.3))
    print(f"{x:+7.2f}  {f.g11[0, k]:10.5f} {a.g11:10.5f}  {f.g22[0, k]:.3e} {a.g22:.3e}")

# %% [markdown]
# ## Scalar curvature of the numeric field
#
# The deviation from -4 has a stencil part, fixed by the mesh, and a
# finite-size part that falls like 1/j.

# %%
mx, my = np.linspace(-6, 6, 61), np.linspace(0.5, 3, 26)
for j in (30, 60, 120):
    r = scalar_curvature_field(qgt_mesh(j, mx, my, "ground")).R[2:-2, 2:-2]
    g = np.array([[[getattr(hp_ground_metric(j, ModelParams(a, b)), k)
                    for k in ("g11", "g12", "g22")] for a in mx] for b in my])
    r0 = scalar_curvature_field(QgtField.from_arrays(mx, my, *np.moveaxis(g, -1, 0))).R[2:-2, 2:-2]
    print(f"j = {j:3d}: max |R + 4| {np.nanmax(np.abs(r + 4)):.4f}, "
          f"median |R - R_closed form| {np.nanmedian(np.abs(r - r0)):.4f}")
