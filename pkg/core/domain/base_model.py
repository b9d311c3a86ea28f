from pydantic import BaseModel as PydBaseModel
from pydantic import ConfigDict


class BaseModel(PydBaseModel):
    """Immutable value object; numpy arrays are allowed as field types."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
