import json

import numpy as np
import pytest

from science_index import clients
from science_index.bibliometrics import CareerStats
from science_index.regression import (FeatureVector, ModelConfig, REFERENCE_WEIGHTS,
                                      fit_batch, reference_preset)


@pytest.fixture
def preset_model():
    """Shipped weights, residuals frozen at mean 0 / std 1."""
    return reference_preset(delta_mean=0.0, delta_std=1.0)


def make_noiseless_features(n=100, seed=7, weights=REFERENCE_WEIGHTS):
    """Well-spread points whose target is exactly the linear model."""
    rng = np.random.default_rng(seed)
    a1 = rng.uniform(0, 40, n)
    a2 = rng.uniform(0, 200, n)
    a3 = rng.uniform(0, 5000, n)
    w0, w1, w2, w3 = weights
    return [FeatureVector(alpha1=x1, alpha2=x2, alpha3=x3,
                          actual_h=w0 + w1 * x1 + w2 * x2 + w3 * x3)
            for x1, x2, x3 in zip(a1, a2, a3)]


def make_noisy_features(n=1000, seed=11, noise=2.0):
    rng = np.random.default_rng(seed)
    a1 = rng.uniform(0, 40, n)
    a2 = rng.uniform(0, 200, n)
    a3 = rng.uniform(0, 5000, n)
    w0, w1, w2, w3 = REFERENCE_WEIGHTS
    y = w0 + w1 * a1 + w2 * a2 + w3 * a3 + rng.normal(0, noise, n)
    return [FeatureVector(alpha1=x1, alpha2=x2, alpha3=x3,
                          actual_h=max(t, 0.0))
            for x1, x2, x3, t in zip(a1, a2, a3, y)]


@pytest.fixture
def fitted_model():
    return fit_batch(ModelConfig(), make_noisy_features(200))


def make_stats_population(n=200, seed=3, share_mean=6.6):
    """Synthetic CareerStats cohort with Poisson share counts."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        career = int(rng.integers(1, 41))
        pubs = max(1, int(round(1.2 * career * rng.lognormal(0, 0.25))))
        cites = int(round(12.0 * pubs * rng.lognormal(0, 0.35)))
        h = 0.06902 * career + 0.10867 * pubs + 0.00304 * cites \
            + rng.normal(0, 1.5)
        h = min(max(int(round(h)), 0), pubs)
        out.append(CareerStats(career_length=career, publication_count=pubs,
                               citation_count=cites, h_index=h,
                               data_share_count=int(rng.poisson(share_mean)),
                               author_id=f"a{i}"))
    return out


# --- API fixture helpers ---

def semantic_scholar_body(papers):
    """papers: list of (year, citation_count) tuples."""
    return json.dumps({"data": [
        {"paperId": f"p{i}", "year": year, "citationCount": cites}
        for i, (year, cites) in enumerate(papers)
    ]}).encode("utf-8")


def datacite_body(resource_types):
    return json.dumps({"data": [
        {"id": f"doi{i}", "attributes": {"types": {"resourceTypeGeneral": t}}}
        for i, t in enumerate(resource_types)
    ]}).encode("utf-8")


@pytest.fixture
def fixture_cache(tmp_path):
    """Pre-recorded API responses for researcher 'alice'."""
    cache_dir = tmp_path / "api_cache"
    policy = clients.FetchPolicy(cache_dir=str(cache_dir),
                                 mode=clients.MODE_FIXTURE_ONLY)
    clients._cache_put(policy, "semantic_scholar_author_papers", "alice",
                       semantic_scholar_body([(2001, 10), (2011, 8), (2005, 4)]))
    clients._cache_put(policy, "datacite_dois", "alice",
                       datacite_body(["Dataset"] * 7 + ["Text", "Software"]))
    return str(cache_dir)
