from pydantic import BaseModel, ConfigDict, Field

from utils.errors import ContractError


class LrSchedule(BaseModel):
    initial: float = Field(1e-4, gt=0)
    decay: float = Field(0.95, gt=0, le=1)
    interval: int = Field(5000, ge=1)
    staircase: bool = Field(True)
    model_config = ConfigDict(extra="forbid", frozen=True)


def lr_at(schedule: LrSchedule, step: int) -> float:
    """
    staircase: α0 · decay^floor(step / interval)
    иначе:     α0 · decay^(step / interval); decay = 1 даёт постоянную скорость
    """
    if step < 0:
        raise ContractError(f"step must be non-negative, got {step}")
    if schedule.staircase:
        return schedule.initial * schedule.decay ** (step // schedule.interval)
    return schedule.initial * schedule.decay ** (step / schedule.interval)
