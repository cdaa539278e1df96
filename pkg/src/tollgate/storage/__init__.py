from tollgate.storage.blobs import BlobStore  # noqa: F401
from tollgate.storage.registries import RegistryState  # noqa: F401
