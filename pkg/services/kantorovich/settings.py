# services/kantorovich/settings.py
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field
from pathlib import Path


class Settings(BaseSettings):
    # ---- Series truncation ----
    # Certified upper bound on the weight mass dropped past the last term
    tail_mass_tol: float = Field(default=1e-14, gt=0, lt=1)
    # Lower bound on the term budget; the budget grows with n and x
    max_terms_floor: int = Field(default=1000, ge=1)

    # ---- Quadrature / precision ----
    quadrature_order: int = Field(default=16, ge=1, le=128)
    # Working decimal digits for the scale of the first weight
    mp_dps: int = Field(default=30, ge=15)

    # ---- Analysis ----
    # Weighted sups are taken on [0, x_max_trunc]
    x_max_trunc: float = Field(default=50.0, gt=0)
    # Lattice size used for moduli of continuity
    modulus_points: int = Field(default=2001, ge=3)
    # Fitted estimate constants are multiplied by this before validation
    calibration_safety: float = Field(default=2.0, ge=1.0)
    bv_lambda: float = Field(default=2.0, gt=1.0)

    # ---- Runtime ----
    moment_cache_size: int = Field(default=256, ge=1)
    # 1 = sweeps run serially
    max_workers: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    output_dir: str = "reports"

    model_config = SettingsConfigDict(
        # Always load .env from the same folder as this settings.py
        env_file=str(Path(__file__).resolve().parent / ".env"),
        env_prefix="KANTOROVICH_",
        extra="ignore",
    )


_settings_instance = None

def get_settings() -> Settings:
    """Singleton pattern for settings."""
    global _settings_instance
    if _settings_instance is None:
        _settings_instance = Settings()
    return _settings_instance
