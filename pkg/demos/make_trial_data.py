"""Regenerate the bundled synthetic trial dataset (demos/data/delayed_effect_trial.csv).

Two arms of 300 subjects with a delayed separation of the survival curves:
both arms share the control hazard until month 6 (0.5 years), after which
the intervention hazard drops. Response status is coupled to survival
through a Frank copula so responders tend to live longer, censoring mixes
staggered-entry administrative censoring with mild dropout. The shape
mimics an immunotherapy trial read-out: overlapping curves early,
separation late, response rates 0.11 vs 0.20.

The CSV is committed; run this script only to regenerate it.
"""

import pathlib

import numpy as np

from binsurv import frank_pair, to_csv
from binsurv.dataset import TrialDataset

N_PER_ARM = 300
DELAY = 0.5
BASE_HAZARD = 0.55
LATE_HAZARD_RATIO = 0.58
RESPONSE = (0.11, 0.20)
THETA = 2.5
TAU = 4.0
SEED = 20240807


def survival_quantile(v, hr):
    """Inverse survival of the piecewise-exponential delayed-effect model."""
    t_break = np.exp(-BASE_HAZARD * DELAY)
    early = -np.log(v) / BASE_HAZARD
    late = DELAY - (np.log(v) + BASE_HAZARD * DELAY) / (BASE_HAZARD * hr)
    return np.where(v >= t_break, early, late)


def main():
    rng = np.random.Generator(np.random.Philox(SEED))
    cols = {"time": [], "status": [], "binary": [], "group": []}
    for arm, (p, hr) in enumerate(zip(RESPONSE, (1.0, LATE_HAZARD_RATIO))):
        u = rng.random(N_PER_ARM)
        w = rng.random(N_PER_ARM)
        _, v = frank_pair(THETA, u, w)
        t = survival_quantile(np.clip(v, 1e-12, 1 - 1e-12), hr)
        admin = rng.uniform(2.5, TAU + 0.5, N_PER_ARM)   # staggered entry
        dropout = rng.exponential(12.0, N_PER_ARM)
        c = np.minimum(admin, dropout)
        cols["time"].extend(np.round(np.minimum(t, c), 6))
        cols["status"].extend((t <= c).astype(int))
        cols["binary"].extend((u <= p).astype(int))
        cols["group"].extend([arm] * N_PER_ARM)
    ds = TrialDataset(cols["time"], cols["status"], cols["binary"], cols["group"])
    out = pathlib.Path(__file__).parent / "data" / "delayed_effect_trial.csv"
    out.parent.mkdir(exist_ok=True)
    out.write_text(to_csv(ds))
    print(f"wrote {out} ({ds.n0}+{ds.n1} subjects, "
          f"{int(ds.status.sum())} events, "
          f"response {ds.binary[ds.group == 0].mean():.3f} vs {ds.binary[ds.group == 1].mean():.3f})")


if __name__ == "__main__":
    main()
