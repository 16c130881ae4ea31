"""Exception hierarchy for the codec, model files, and container parsing."""


class GicdlcError(Exception):
    """Base class for all errors raised by this package."""


class ModelFormatError(GicdlcError):
    """A model file could not be parsed."""


class BadModelMagic(ModelFormatError):
    pass


class UnsupportedModelVersion(ModelFormatError):
    pass


class TruncatedModel(ModelFormatError):
    pass


class ModelHashMismatch(ModelFormatError):
    """Stored content hash does not match the model bytes."""


class ContainerError(GicdlcError):
    """A bitstream container could not be parsed."""


class BadContainerMagic(ContainerError):
    pass


class UnsupportedContainerVersion(ContainerError):
    pass


class TruncatedContainer(ContainerError):
    pass


class ChecksumMismatch(ContainerError):
    pass


class ModelMismatchError(GicdlcError):
    """Container was produced with different models than the ones supplied."""


class CorruptStreamError(GicdlcError):
    """Entropy-coded payload ran out of bytes with symbols outstanding."""


class DataFormatError(GicdlcError):
    """Dataset or image file (IDX, PGM, results import) could not be parsed."""
