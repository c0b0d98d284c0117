# %% [markdown]
# # Convergence studies
#
# run_study solves a grid of configurations and reports EOC for mesh-halving
# sweeps and the exponential slope for Y sweeps. The same harness backs the
# `fracext study` command.

# %%
from fracext import StudyPoint, eigen_interval, parse_spectral, run_study

f = parse_spectral("1:1", eigen_interval())
mesh = [StudyPoint(s, 3.0, 2.0, n, n) for s in (1.25, 1.75) for n in (8, 16, 32, 64)]
study = run_study(f, mesh, workers=4)
print(study.to_csv(timing=False))

# %% [markdown]
# A Y sweep at a fine fixed mesh isolates the truncation error.

# %%
ysweep = run_study(f, [StudyPoint(1.5, Y, 2.0, 48, 48) for Y in (1.0, 2.0, 3.0)])
for rec in ysweep.records:
    print(f"Y={rec.Y}  err_hs {rec.err_hs:.3e}")
print(ysweep.y_slopes)
