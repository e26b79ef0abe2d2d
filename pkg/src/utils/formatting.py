import math


def nats_to_bits(value: float) -> float:
    """Convert an information quantity from nats to bits."""
    return value / math.log(2.0)


def db_to_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def format_run_summary(summary: dict) -> str:
    """Format a finished run for terminal display."""
    lines = [
        f"🧪 Experiment: {summary.get('experiment', 'N/A')}",
        f"📈 Records: {summary.get('records', 0)}",
        f"⏱️  Wall time: {summary.get('wall_time_s', 0.0):.2f} s",
        f"💾 Output: {summary.get('output', 'N/A')}",
    ]
    return "\n".join(lines)
