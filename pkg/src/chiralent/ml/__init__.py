"""From-scratch classifiers and the zero-false-positive evaluation protocol."""

from .forest import RandomForest, Tree, best_split, grow_tree
from .logreg import LogRegEN, Scaler, balanced_weights, fit_logreg_en, sklearn_penalties
from .metrics import auc, confusion, roc_curve
from .protocol import (
    ClassifierModel,
    check_feature_names,
    EvalReport,
    cv_zero_fp,
    evaluate,
    lambda_grid,
    select_by_cv_auc,
    stratified_folds,
    train,
    train_logreg_en,
    train_random_forest,
    zero_fp_threshold,
)
