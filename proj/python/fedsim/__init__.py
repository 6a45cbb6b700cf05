"""Federated learning simulator: adaptive client selection, partial model
sharing and personalization on a deterministic desk-scale engine."""

from ._core import (  # noqa: F401
    ClientPerf,
    ClientSplit,
    ConfigError,
    CsvError,
    Dataset,
    ParamSet,
    ShareSpec,
    TrainConfig,
    __version__,
    aggregate,
    compare,
    decay_count,
    dynamic_layer_count,
    efficiency,
    evaluate,
    filter_clients,
    forward,
    generate_blobs,
    init_params,
    load_csv,
    loss_and_grad,
    make_share_spec,
    merge_layers,
    overhead_reduction,
    partition,
    run_experiment,
    run_to_dir,
    select_acsp,
    select_oort_lite,
    select_poc,
    select_random_k,
    sgd_fit,
    slice_layers,
    write_csv,
)
