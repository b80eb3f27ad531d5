# %% [markdown]
# # Phases and spectrum of the extended LMG model
#
# H = Omega Jz + Omega_x Jx + (xi_y/j) Jy^2. The classical energy surface has
# a maximum that splits into two (x4, x4') once xi_y exceeds the separatrix
# value sqrt(1 + Omega_x^2)/2. The split leaves a saddle at x1, whose energy
# marks a peak in the density of states.

# %%
import math

import numpy as np

from lmg_geometry.semiclassical import critical_lines, lyapunov_exponent, stationary_points
from lmg_geometry.spectral import density_of_states, spectrum_at
from lmg_geometry.spin import ModelParams

# %% [markdown]
# ## Stationary points on both sides of the separatrix

# %%
for xi in (0.3, 2.0):
    p = ModelParams(0.5, xi)
    print(f"xi_y = {xi}: separatrix at xi = {critical_lines(p)['separatrix_xi']:.4f}, "
          f"lambda = {lyapunov_exponent(p):.4f}")
    for sp in stationary_points(p):
        print(f"  {sp.label:4s} Q={sp.point.Q:+.4f} P={sp.point.P:+.4f} "
              f"E/j={sp.energy:+.4f} {sp.stability}")

# %% [markdown]
# ## Density of states
#
# At Omega_x = 0.2 sqrt(15) and xi_y = 2 the saddle sits at
# E/j = sqrt(1 + Omega_x^2) = 1.265. The histogram of E_k/j peaks there.

# %%
ox = 0.2 * math.sqrt(15)
h = density_of_states(spectrum_at(256, ModelParams(ox, 2.0)), 40)
k = int(np.argmax(h.counts))
print(f"saddle energy {math.sqrt(1 + ox * ox):.4f}, "
      f"largest bin [{h.bin_edges[k]:.4f}, {h.bin_edges[k + 1]:.4f}] with {h.counts[k]} levels")
for left, right, c in zip(h.bin_edges[:-1], h.bin_edges[1:], h.counts):
    print(f"{left:+.3f} {right:+.3f} {'#' * int(c // 2)}")
