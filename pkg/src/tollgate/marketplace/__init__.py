from tollgate.marketplace.broker import Marketplace  # noqa: F401
from tollgate.marketplace.store import KeyValueStore  # noqa: F401
