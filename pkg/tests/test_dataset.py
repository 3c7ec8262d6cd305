import numpy as np
import pytest

from chiralent import dataset, spectral
from chiralent.errors import ConfigError


def test_small_dataset_is_balanced_and_certified():
    cfg = dataset.GeneratorConfig(scale=0.02, seed=1)
    ds = dataset.generate(cfg)
    counts = cfg.family_counts()
    assert len(ds) == 2 * sum(counts.values())
    assert int(ds.y.sum()) == sum(counts.values())
    assert set(ds.family[ds.y == 1]) == set(counts)
    for rho, y in zip(ds.states, ds.y):
        if y == 1:
            assert spectral.herm_eigvals(spectral.partial_transpose(rho))[-1] > dataset.PPT_TOL
    assert ds.X.shape == (len(ds), 8)


def test_generation_is_deterministic():
    a = dataset.generate(dataset.GeneratorConfig(scale=0.01, seed=3))
    b = dataset.generate(dataset.GeneratorConfig(scale=0.01, seed=3))
    assert np.array_equal(a.X, b.X)


def test_subset_and_ccnr_rule():
    ds = dataset.generate(dataset.GeneratorConfig(scale=0.01, seed=0))
    sub = ds.subset([0, 1, len(ds) - 1])
    assert len(sub) == 3 and sub.family[-1] == "SEP"
    rule = dataset.ccnr_rule(ds.X, ds.feature_names)
    assert np.all(rule[ds.y == 0] == 0)


@pytest.mark.parametrize("kw", [{"scale": 0.0}, {"tiles_eps": (0.0, 0.2)}, {"mn_t": (0.3, 0.1)},
                                {"sep_k": (0, 3)}])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        dataset.GeneratorConfig(**kw).validate()
