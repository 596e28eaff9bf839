from src.anoscope.pipelines.base import BasePipeline, PipelineOutput
from src.anoscope.pipelines.bench_toy import BenchToyPipeline, run_bench_toy, write_bench_table
from src.anoscope.pipelines.thyroid import ThyroidPipeline, run_thyroid_pipeline

__all__ = [
    "BasePipeline",
    "BenchToyPipeline",
    "PipelineOutput",
    "ThyroidPipeline",
    "run_bench_toy",
    "run_thyroid_pipeline",
    "write_bench_table",
]
