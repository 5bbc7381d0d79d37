from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass(frozen=True)
class CommandResult:
    """统一的命令返回结构"""
    code: int
    message: Optional[str] = None
    data: Any = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.code == 0

    @staticmethod
    def success(data: Any = None, message: Optional[str] = None) -> "CommandResult":
        return CommandResult(code=0, message=message, data=data if data is not None else {})

    @staticmethod
    def error(message: str, code: int = 1, data: Any = None) -> "CommandResult":
        if code == 0:
            raise ValueError("error results need a non-zero exit code")
        return CommandResult(code=code, message=message, data=data)

    @staticmethod
    def custom(code: int, message: Optional[str] = None, data: Any = None) -> "CommandResult":
        return CommandResult(code=code, message=message, data=data if data is not None else {})
