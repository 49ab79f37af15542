import pytest

from fracpath import GeneratorSpec, generate


@pytest.fixture(scope="session")
def linear_1024():
    return generate(GeneratorSpec("linear", n_steps=1024))


@pytest.fixture(scope="session")
def linear_4096():
    return generate(GeneratorSpec("linear", n_steps=4096))


@pytest.fixture(scope="session")
def tent_4096():
    return generate(GeneratorSpec("tent", n_steps=4096))


def fbm(n_steps, hurst, seed, dim=1):
    return generate(GeneratorSpec("fbm", n_steps=n_steps, dim=dim, params={"hurst": hurst}, seed=seed))


def stable(n_steps, alpha, seed):
    return generate(GeneratorSpec("stable_levy", n_steps=n_steps, params={"alpha": alpha}, seed=seed))
