import pytest


@pytest.fixture(scope="session")
def tiny_fx_path(tmp_path_factory):
    """Five business days of fixings, small enough for fast end-to-end runs."""
    path = tmp_path_factory.mktemp("fx") / "tiny_fx.csv"
    path.write_text(
        "date,chf_eur,chf_sgd\n"
        "2023-01-02,0.950000,1.460000\n"
        "2023-01-03,0.952000,1.461500\n"
        "2023-01-04,0.948500,1.458000\n"
        "2023-01-05,0.955000,1.465000\n"
        "2023-01-06,0.960000,1.470000\n"
    )
    return path
