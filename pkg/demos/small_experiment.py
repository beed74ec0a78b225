"""A small noiseless recovery experiment: wedge versus Lasso.

The full desk-scale runs take minutes; this uses 3 trials.
"""
from structpen.bench import ExperimentSpec, run_experiment

spec = ExperimentSpec(model="wedge10", n=50, trials=3, sample_sizes=(10, 20, 30, 40),
                      methods=("lasso", "wedge"))
res = run_experiment(spec)
print(f"{'m':>4} {'lasso':>10} {'wedge':>10}")
for m in spec.sample_sizes:
    print(f"{m:>4} {res.mean('lasso', m):10.2e} {res.mean('wedge', m):10.2e}")
