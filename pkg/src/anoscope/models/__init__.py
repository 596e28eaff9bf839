from src.anoscope.models.base import BaseDetector
from src.anoscope.models.gaussian import GaussianModel, fit_gaussian
from src.anoscope.models.gmm import GMMModel, GMMScoring, fit_gmm
from src.anoscope.models.kde import KDEModel, fit_kde, select_bandwidth
from src.anoscope.models.kpca import KPCAModel, fit_kpca, kpca_score, neighbor_similarity_gamma
from src.anoscope.models.mve import MVEModel, fit_mve
from src.anoscope.models.ocsvm import OCSVMModel, fit_ocsvm
from src.anoscope.models.pca import PCAModel, PCASolver, fit_pca
from src.anoscope.models.ppca import PPCAModel, fit_ppca
from src.anoscope.models.selection import SelectionResult, select_nu_and_gamma
from src.anoscope.models.svdd import SVDDModel, fit_semi_supervised_svdd, fit_svdd
from src.anoscope.models.vq import VQModel, VQNorm, fit_vq

__all__ = [
    "BaseDetector",
    "GMMModel",
    "GMMScoring",
    "GaussianModel",
    "KDEModel",
    "KPCAModel",
    "MVEModel",
    "OCSVMModel",
    "PCAModel",
    "PCASolver",
    "PPCAModel",
    "SVDDModel",
    "SelectionResult",
    "VQModel",
    "VQNorm",
    "fit_gaussian",
    "fit_gmm",
    "fit_kde",
    "fit_kpca",
    "fit_mve",
    "fit_ocsvm",
    "fit_pca",
    "fit_ppca",
    "fit_semi_supervised_svdd",
    "fit_svdd",
    "fit_vq",
    "kpca_score",
    "neighbor_similarity_gamma",
    "select_nu_and_gamma",
]
