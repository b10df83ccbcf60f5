# %% [markdown]
# # Sampling a multipath signal with a bank of filters
#
# Two delayed copies of a gain sequence pass through four tapered bandpass
# filters. Each channel is sampled once per symbol period, far below the
# Nyquist rate of the pulse. The correction bank then undoes the mixing.

# %%
import numpy as np

from subnyq import BandConfig
from subnyq.correction import apply, build_exact, design_fir
from subnyq.frontend import flat_pulse, synthesize_samples, tapered_bandpass, w_grid
from subnyq.model import vandermonde

cfg = BandConfig(p=4, n_grid=128)
bank, pulse = tapered_bandpass(cfg), flat_pulse(cfg)

W, cond = w_grid(bank, pulse, cfg)
print("W per bin:", W.shape, " worst condition number:", round(cond.max(), 2))

# %%
rng = np.random.default_rng(1)
tau = np.array([0.25, 0.61])
a = rng.standard_normal((2, 128)) + 1j * rng.standard_normal((2, 128))
c = synthesize_samples(tau, a, bank, pulse, cfg)
print("raw samples:", c.channels.shape)

# %% [markdown]
# After exact correction the samples collapse onto the span of the two
# steering vectors, so projecting out that span leaves only round-off.

# %%
d = apply(build_exact(bank, pulse, cfg), c)
N = vandermonde(tau, cfg)
residual = d.channels - N @ np.linalg.pinv(N) @ d.channels
print("off-subspace residual:", np.abs(residual).max())

# %% [markdown]
# A practical receiver uses short FIR filters instead. The residual grows as
# the filters get shorter.

# %%
for L in (11, 25, 49):
    dL = apply(design_fir(bank, pulse, cfg, L), c)
    print(f"L={L:2d}  max deviation from exact correction: {np.abs(dL.channels - d.channels).max():.2e}")
