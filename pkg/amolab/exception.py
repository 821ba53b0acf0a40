class AmoLabException(Exception):
    pass


class AmoLabFrequencyException(AmoLabException):
    pass


class InsufficientDepthException(AmoLabFrequencyException):
    pass


class DepthCapExceededException(AmoLabFrequencyException):

    def __init__(self, message, achievable_depth=None):
        super().__init__(message)
        self.achievable_depth = achievable_depth


class PrecisionUnavailableException(AmoLabFrequencyException):
    pass


class AmoLabOperatorException(AmoLabException):
    pass


class BoxSizeException(AmoLabOperatorException):
    pass


class AmoLabGreenException(AmoLabException):
    pass


class SingularBoxException(AmoLabGreenException):
    pass


class NearSingularException(AmoLabGreenException):
    pass


class AmoLabResonanceException(AmoLabException):
    pass


class DegenerateNodeException(AmoLabResonanceException):

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class AmoLabLocalizationException(AmoLabException):
    pass


class NotLocalizedException(AmoLabLocalizationException):
    pass


class ConvergenceException(AmoLabLocalizationException):
    pass


class AmoLabConfigException(AmoLabException):
    pass
