from tollgate.crypto.suite import (  # noqa: F401
    SealedPackage,
    decrypt_result,
    encrypt_result,
    hash_policy,
    open_from_seller,
    seal_for_node,
)
