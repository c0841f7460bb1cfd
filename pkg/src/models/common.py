"""
Common report models
"""

from datetime import datetime
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class ErrorDetail(BaseModel):
    """Error detail information"""

    error_code: str = Field(description="Error code")
    error_message: str = Field(description="Error message")
    error_type: str = Field(description="Error type")
    exit_status: int = Field(description="Process exit status")
    timestamp: datetime = Field(default_factory=datetime.utcnow, description="Error timestamp")

    # Context information
    run_id: Optional[str] = Field(default=None, description="Run ID")
    command: Optional[str] = Field(default=None, description="CLI command")

    # Stack trace (for debugging)
    stack_trace: Optional[str] = Field(default=None, description="Stack trace")


class PrecisionRecallPoint(BaseModel):
    """Precision and recall at one decision threshold"""

    threshold: float = Field(description="Queries with score >= threshold are positive")
    precision: float = Field(ge=0, le=1)
    recall: float = Field(ge=0, le=1)
    f1: float = Field(ge=0, le=1)
    true_positives: int = Field(ge=0)
    false_positives: int = Field(ge=0)
    false_negatives: int = Field(ge=0)


class PlaceRecognitionReport(BaseModel):
    """Place-recognition metrics for one classification mode"""

    mode: str = Field(description="Classification mode")
    query_count: int = Field(ge=0, description="Queries evaluated")
    revisit_count: int = Field(ge=0, description="Queries with an eligible match within r_tp")
    recall_at_1: float = Field(ge=0, le=1)
    recall_at_5: float = Field(ge=0, le=1)
    f1_max: float = Field(ge=0, le=1)
    f1_threshold: Optional[float] = Field(default=None, description="Threshold reaching f1_max")
    curve: List[PrecisionRecallPoint] = Field(default_factory=list, description="Sweep, descending threshold")


class RegistrationReport(BaseModel):
    """Aggregate registration accuracy"""

    pair_count: int = Field(ge=0)
    success_count: int = Field(ge=0)
    accuracy: float = Field(ge=0, le=1, description="Success fraction")
    mean_rre: Optional[float] = Field(default=None, description="Mean RRE over successes, degrees")
    mean_rte: Optional[float] = Field(default=None, description="Mean RTE over successes, meters")
    median_rre: Optional[float] = Field(default=None, description="Median RRE over all pairs, degrees")
    median_rte: Optional[float] = Field(default=None, description="Median RTE over all pairs, meters")
    rre_max: float = Field(description="Rotation bound in degrees")
    rte_max: float = Field(description="Translation bound in meters")

    def as_row(self) -> Dict[str, str]:
        """Formatted values for console tables"""
        def fmt(value: Optional[float], digits: int) -> str:
            return "-" if value is None else f"{value:.{digits}f}"

        return {
            "pairs": str(self.pair_count),
            "accuracy": fmt(self.accuracy, 3),
            "mean RRE (deg)": fmt(self.mean_rre, 3),
            "mean RTE (m)": fmt(self.mean_rte, 3),
            "median RRE (deg)": fmt(self.median_rre, 3),
            "median RTE (m)": fmt(self.median_rte, 3),
        }
