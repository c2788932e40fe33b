from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True)

    # Runtime Configuration
    PYTHON_ENV: str = Field(default="development")
    LOG_LEVEL: str = Field(default="INFO")

    # Measure Configuration
    EPSILON: float = Field(default=1e-9, gt=0)

    # Solver Configuration
    GAMMA: float = Field(default=0.9, ge=0, lt=1)
    TOLERANCE: float = Field(default=1e-9, gt=0)
    MAX_ITER: int = Field(default=100_000, ge=1)
    TIE_TOLERANCE: float = Field(default=1e-7, ge=0)
    PARALLEL_SWEEP: bool = Field(default=False)
    SOLVER_WORKERS: int = Field(default=4, ge=1)

    # Size Guards
    ISO_MAX_STATES: int = Field(default=12, ge=1)
    GROUP_BUDGET: int = Field(default=10_000, ge=1)
    PRODUCT_STATE_BUDGET: int = Field(default=1_000_000, ge=1)
    MORPHISM_ENUM_BUDGET: int = Field(default=200_000, ge=1)

    def stop_threshold(self, gamma: float, tol: float) -> float:
        """Sup-norm residual at which value iteration is within tol of v*."""
        if gamma <= 0:
            return float("inf")
        return tol * (1 - gamma) / (2 * gamma)


settings = Settings()
