"""Instance files, experiment runner, ground truth and the command line."""

from .bench import (
    SUMMARY_HEADER,
    TRACE_HEADER,
    ExperimentReport,
    ExperimentSpec,
    GeneratorParams,
    load_spec,
    read_trace_csv,
    run_experiment,
    write_trace_csv,
)
from .bruteforce import (
    brute_force_optimum,
    enumerate_spanning_trees,
    enumerate_tours,
    enumerate_vertices,
)
from .instances import (
    InstanceError,
    InstanceFile,
    dumps_instance,
    generate_instance,
    instance_from_dict,
    instance_to_dict,
    read_instance,
    write_instance,
)
