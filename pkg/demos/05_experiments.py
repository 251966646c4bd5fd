r"""
Experiments
-----------
The same drivers sit behind the ``bo`` command, for example::

    bo illposedness --config demos/configs/illposedness.cfg --out out/ill

Each run writes CSV tables and a ``summary.json`` with one pass/fail flag
per check.
"""
from botorus.experiments import ExperimentConfig, run

rep = run(ExperimentConfig("illposedness", {"s": 0.6, "t": 0.3}))
for row in rep.tables["one_gap_family"]:
    print(f"k={row['k']}  init {row['dist_initial']:.3e}  evolved {row['dist_evolved']:.3f}  omega {row['omega_closed']:9.3f}")
print(rep.checks)

#%%
rep = run(ExperimentConfig("recurrence", {"datum": "actions", "actions": (0.5, 1.0), "t_max": 14.0, "invert_returns": False}))
print(rep.summary)
for row in rep.tables["returns"]:
    print(row)
