from src.anoscope.data.contamination import ContaminationSpec, UniformBox, contaminate
from src.anoscope.data.io import load_csv, load_scores_csv, write_csv, write_scores_csv
from src.anoscope.data.scaling import RobustScaler, apply_scaler, fit_robust_scaler
from src.anoscope.data.splits import holdout_split, stratified_split
from src.anoscope.data.toy import TOY_BOUNDS, TwoMoonsConfig, gen_nuisance_dataset, gen_two_moons, sample_uniform_anomalies

__all__ = [
    "ContaminationSpec",
    "RobustScaler",
    "TOY_BOUNDS",
    "TwoMoonsConfig",
    "UniformBox",
    "apply_scaler",
    "contaminate",
    "fit_robust_scaler",
    "gen_nuisance_dataset",
    "gen_two_moons",
    "holdout_split",
    "load_csv",
    "load_scores_csv",
    "sample_uniform_anomalies",
    "stratified_split",
    "write_csv",
    "write_scores_csv",
]
