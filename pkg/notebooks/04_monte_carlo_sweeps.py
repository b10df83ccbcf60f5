# %% [markdown]
# # Monte-Carlo sweeps
#
# Each sweep reuses the same random draws across its grid points, so the
# curves are smooth even with modest trial counts. Results are identical
# for any thread count.

# %%
from subnyq.harness import ExperimentConfig, format_csv, run_scenario

snr = run_scenario(ExperimentConfig.for_scenario("mse-vs-snr", trials=100), threads=4)
print(format_csv(snr["mse_vs_snr"]))

# %%
nvec = run_scenario(ExperimentConfig.for_scenario("mse-vs-nvec", trials=100), threads=4)
for row in nvec["mse_vs_nvec"]:
    if row["nvec"] in (25, 50, 100):
        print(f"fd={row['fd']}  nvec={row['nvec']:3d}  mse={row['mse']:.2e}")

# %% [markdown]
# Short correction filters put a floor under the error at high SNR.

# %%
taps = run_scenario(ExperimentConfig.for_scenario("mse-vs-taps", trials=50), threads=4)
for row in taps["mse_vs_taps"]:
    if row["snr_db"] in (20.0, 60.0):
        print(f"L={row['taps']:2d}  {row['snr_db']:g} dB  mse={row['mse']:.2e}")
