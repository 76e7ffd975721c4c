from .app import app, create_app
from .models import FamilyEvalConfig, ProblemConfig

__all__ = ["app", "create_app", "ProblemConfig", "FamilyEvalConfig"]
