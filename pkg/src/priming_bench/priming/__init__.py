from .classify import UNKNOWN, classify_structure
from .evaluate import (
    CATEGORIES,
    EvalConfig,
    InsufficientDonorsError,
    PrimingReport,
    choose_donors,
    evaluate_reference_categories,
    normalized_from_raw,
    normalized_pair,
    normalized_target_prob,
    priming_report,
    priming_score,
)
from .generate import (
    CapacityError,
    PrimingItem,
    generate_corpus_with_keys,
    generate_parallel_corpus,
    generate_test_set,
    load_test_set,
    realize,
    save_test_set,
)
