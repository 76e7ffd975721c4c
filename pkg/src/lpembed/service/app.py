"""HTTP surface: one endpoint per pipeline command.

Configuration errors map to 422, numeric precondition failures to 409.
A certification that ran but failed is still a 200: the verdict lives in
the report body, not the status code.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import (
    ConfigError,
    DomainMismatch,
    GuardViolation,
    InvalidExponent,
    InvalidParams,
    LpEmbedError,
    NotSymmetric,
    SingularMatrix,
    SingularOnDomain,
)
from .handlers import run_certify, run_classify, run_diagonalize, run_family_eval
from .models import (
    CertifyReport,
    ClassifyReport,
    DiagonalizeReport,
    FamilyEvalConfig,
    FamilyEvalReport,
    HealthModel,
    ProblemConfig,
)

CONFIG_ERRORS = (ConfigError, InvalidExponent, InvalidParams)
PRECONDITION_ERRORS = (
    SingularMatrix,
    NotSymmetric,
    GuardViolation,
    SingularOnDomain,
    DomainMismatch,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="lpembed",
        description=(
            "Decides whether an isometric embedding exists between Lp spaces of "
            "solutions of two second-order PDEs, constructs the witnessing "
            "weighted composition operator, and certifies it numerically."
        ),
        version=__version__,
    )

    @app.exception_handler(LpEmbedError)
    async def _lpembed_error(request: Request, exc: LpEmbedError):
        if isinstance(exc, CONFIG_ERRORS):
            status = 422
        elif isinstance(exc, PRECONDITION_ERRORS):
            status = 409
        else:
            status = 500
        return JSONResponse(
            status_code=status,
            content={"error": {"kind": type(exc).__name__, "message": str(exc)}},
        )

    @app.get("/health", response_model=HealthModel)
    def health():
        return HealthModel()

    @app.post("/diagonalize", response_model=DiagonalizeReport)
    def diagonalize_endpoint(cfg: ProblemConfig):
        return run_diagonalize(cfg)

    @app.post("/classify", response_model=ClassifyReport)
    def classify_endpoint(cfg: ProblemConfig):
        return run_classify(cfg)

    @app.post("/certify", response_model=CertifyReport)
    def certify_endpoint(cfg: ProblemConfig):
        return run_certify(cfg)

    @app.post("/family-eval", response_model=FamilyEvalReport)
    def family_eval_endpoint(cfg: FamilyEvalConfig):
        return run_family_eval(cfg)

    return app


app = create_app()
