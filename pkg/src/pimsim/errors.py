"""Exception types shared across the simulator."""


class PimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(PimError):
    """Bad configuration input; the message names the offending key."""


class DmaError(PimError):
    """DMA request violates size or alignment rules."""


class CapacityError(PimError):
    """WRAM or MRAM capacity exceeded."""


class DeadlockError(PimError):
    """No runnable tasklet while synchronization is pending."""


class TransferPlanError(PimError):
    """Host-link transfer plan violates mode constraints."""
