import numpy as np
import pytest

from tradenet.dataio import SyntheticConfig, gen_synthetic
from tradenet.domain import BuyerAgent, Dataset, DistanceMatrix, GlobalParams, SellerAgent


def make_seller(sid: int = 1, **overrides) -> SellerAgent:
    base = dict(
        id=sid,
        village_id=1,
        subdistrict_id=1,
        district_id=1,
        gps_s=-1.5,
        gps_e=103.0,
        education=3,
        ethnicity=2,
        transport=2000.0,
        employees=5,
        prestigious_job=False,
        active_group=False,
        group_count=0,
        age=45.0,
        house_value=50000.0,
        hh_size=4,
        hhs_vlg=100,
        income=10000.0,
        total_sales=1.0e9,
        debt_by_buyer={},
        n_buyer_empirical=1,
    )
    base.update(overrides)
    return SellerAgent(**base)


def make_buyer(bid: int = 101, price: float = 9000.0, **overrides) -> BuyerAgent:
    return BuyerAgent(id=bid, price=price, **overrides)


def square_matrix(ids, values) -> DistanceMatrix:
    return DistanceMatrix(ids=tuple(ids), values=np.asarray(values, dtype=float))


def neutral_params(**overrides) -> GlobalParams:
    base = dict(
        n_social=2.0,
        w_price=25.0,
        w_dist=25.0,
        w_debts=25.0,
        w_social=25.0,
        w_s_education=20.0,
        w_s_ethnicity=20.0,
        w_s_activegroup=20.0,
        w_s_prestigious_job=20.0,
        w_s_proximity=20.0,
    )
    base.update(overrides)
    return GlobalParams(**base)


# planted parameters for recovery experiments: debts dominant, others small
RECOVERY_PLANTED = GlobalParams(
    n_social=1.0,
    w_price=2.0,
    w_dist=10.0,
    w_debts=80.0,
    w_social=1.0,
    w_s_education=6.0,
    w_s_ethnicity=9.0,
    w_s_activegroup=10.0,
    w_s_prestigious_job=1.0,
    w_s_proximity=74.0,
)

# debt ties are random (not nearest-buyer), so only the debt weight explains
# them; remote buyers pay more, so chasing the best price is a bad strategy
RECOVERY_CONFIG = SyntheticConfig(
    n_sellers=40,
    n_buyers=10,
    n_villages=8,
    seed=22,
    debt_zero_rate=0.3,
    debt_attachment="random",
    price_remoteness_premium=900.0,
    buyer_remote_fraction=0.3,
    planted_params=RECOVERY_PLANTED,
)


@pytest.fixture(scope="session")
def recovery_data():
    return gen_synthetic(RECOVERY_CONFIG)


@pytest.fixture(scope="session")
def small_planted():
    config = SyntheticConfig(n_sellers=20, n_buyers=5, n_villages=4, seed=42)
    return gen_synthetic(config)


@pytest.fixture(scope="session")
def full_size_data():
    return gen_synthetic(SyntheticConfig(seed=5))


def two_by_two_dataset() -> Dataset:
    """Two sellers, two buyers; seller 1 is close to buyer 11, seller 2 to 12."""
    sellers = [
        make_seller(1, village_id=1, gps_s=0.0, gps_e=0.0),
        make_seller(2, village_id=2, gps_s=0.0, gps_e=10.0),
    ]
    buyers = [make_buyer(11, 9000.0), make_buyer(12, 9500.0)]
    ids = [1, 2, 11, 12]
    d = np.array(
        [
            [0.0, 10.0, 1.0, 9.0],
            [10.0, 0.0, 9.0, 1.0],
            [1.0, 9.0, 0.0, 8.0],
            [9.0, 1.0, 8.0, 0.0],
        ]
    )
    return Dataset.build(
        sellers, buyers, [(1, 11), (2, 12)], distance_matrix=square_matrix(ids, d)
    )
