from tollgate.sharing.shamir import (  # noqa: F401
    DEFAULT_PRIME,
    Share,
    SharingParams,
    local_dot,
    local_sum,
    reconstruct,
    share,
)
