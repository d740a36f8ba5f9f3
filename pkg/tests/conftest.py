import numpy as np
import pytest

from binsurv import StudyConfig, TrialDataset


@pytest.fixture
def tiny_dataset():
    """4 subjects, 2 per group, mixed events and responses."""
    return TrialDataset(
        time=[1.2, 0.5, 0.7, 2.0],
        status=[1, 1, 0, 1],
        binary=[0, 1, 1, 0],
        group=[0, 0, 1, 1],
    )


@pytest.fixture
def default_config():
    return StudyConfig(tau0=0.0, tau_b=0.5, tau=1.0)


def random_dataset(rng, n_per_group=15, censor_scale=1.5):
    """Small random dataset with both event types and responders in each group."""
    while True:
        n = 2 * n_per_group
        t_event = rng.exponential(1.0, n)
        t_cens = rng.exponential(censor_scale, n)
        time = np.minimum(t_event, t_cens)
        status = (t_event <= t_cens).astype(float)
        binary = (rng.random(n) < 0.4).astype(float)
        group = np.repeat([0.0, 1.0], n_per_group)
        ds = TrialDataset(time, status, binary, group)
        if binary[:n_per_group].sum() and binary[n_per_group:].sum():
            return ds
