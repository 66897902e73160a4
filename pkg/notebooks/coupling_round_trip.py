"""From a susceptibility to its bath coupling and back.

The squared coupling ``|f(omega)|^2`` is the sine transform of chi(t)
rescaled by the bath density of states. Tabulating it for a damped
resonance and transforming back recovers chi(t). The same absorption
gives different couplings for different bath dispersions, but the noise
weight built from either one is unchanged.
"""
import numpy as np

from maxdiq.coupling import chi_from_coupling, coupling_table
from maxdiq.medium import Linear, Lorentz, PowerLaw
from maxdiq.noise import noise_weight_bundle

model = Lorentz(omega0=1.0, gamma=0.2, omegap=0.5)
w = np.linspace(0.0, 200.0, 40001)
table = coupling_table(model, w)

t = np.array([0.5, 1.0, 2.0, 5.0, 10.0])
back = np.asarray(chi_from_coupling(table, t))
exact = np.asarray(model.chi_time(t))
for ti, b, x in zip(t, back, exact):
    print(f"t={ti:5.1f}: chi from table {b:+.6f}, exact {x:+.6f}")

grid = np.linspace(0.1, 5.0, 50)
for disp in (Linear(1.0), PowerLaw(1.0, 2.0)):
    tab = coupling_table(model, grid, dispersion=disp)
    nw = noise_weight_bundle(model, omega=grid, f_table=tab)
    print(f"{disp.kind:>10}: f2 at omega=1 is {np.interp(1.0, grid, tab.value):.4e}, "
          f"noise mismatch {nw.mismatch['electric']:.1e}")
