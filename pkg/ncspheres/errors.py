"""
Excepciones del motor de verificación.

Las operaciones de verificación devuelven informes; estas excepciones
quedan para entradas inválidas y fallos de construcción.
"""


class NCSpheresError(Exception):
    """Raíz de todos los errores del paquete"""


# Escalares
class UnitModeMismatch(NCSpheresError):
    pass


class ZeroUnit(NCSpheresError):
    pass


class NonUnimodular(NCSpheresError):
    pass


# Reescritura
class StepBudgetExceeded(NCSpheresError):
    """Se superó el número máximo de aplicaciones de reglas"""


class MissingFormGenerator(NCSpheresError):
    pass


class NonIntegralPhase(NCSpheresError):
    pass


class InvalidRule(NCSpheresError):
    """Regla que no decrece en el orden o no conserva el peso"""


class PresentationError(NCSpheresError):
    """Error al leer una presentación declarativa"""


class UnknownGenerator(NCSpheresError):
    pass


# Matrices y conexiones
class ShapeMismatch(NCSpheresError):
    pass


class NotAProjection(NCSpheresError):
    pass


class InvariantFailed(NCSpheresError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IdentityFailed(InvariantFailed):
    pass


# Oráculos numéricos
class NotUnitary(NCSpheresError):
    pass


class OracleMismatch(NCSpheresError):
    pass


class DerivationMismatch(NCSpheresError):
    def __init__(self, message, differences=None):
        super().__init__(message)
        self.differences = differences or []


# Complejo cíclico y representaciones
class DegreeZero(NCSpheresError):
    pass


class BadParameter(NCSpheresError):
    pass


class UnknownLetter(NCSpheresError):
    pass


class ConfigError(NCSpheresError):
    pass
