"""
Verification script to check if all components are properly set up
"""
import sys
from pathlib import Path


def check_file_structure():
    """Check if all required files and directories exist"""
    print("🔍 Checking file structure...")

    base_dir = Path(__file__).parent
    src_dir = base_dir / "src"
    tests_dir = base_dir / "tests"
    experiments_dir = base_dir / "config" / "experiments"

    required_files = [
        src_dir / "main.py",
        src_dir / "transforms" / "random_transform.py",
        src_dir / "channel" / "doubly_selective.py",
        src_dir / "prior" / "constellation.py",
        src_dir / "detectors" / "cd_mamp.py",
        src_dir / "detectors" / "cd_oamp.py",
        src_dir / "analysis" / "state_evolution.py",
        src_dir / "power" / "map_ber.py",
        src_dir / "power" / "capacity_pa.py",
        src_dir / "harness" / "experiments.py",
        src_dir / "models" / "experiment_models.py",
        base_dir / "config" / "simulation_config.py",
        experiments_dir / "ber_siso.ini",
        experiments_dir / "pa_siso.ini",
        tests_dir / "conftest.py",
        base_dir / "requirements.txt",
    ]

    missing_files = []
    for file_path in required_files:
        if not file_path.exists():
            missing_files.append(str(file_path))
        else:
            print(f"✅ {file_path.relative_to(base_dir)}")

    if missing_files:
        print("\n❌ Missing files:")
        for file_path in missing_files:
            print(f"   - {file_path}")
        return False

    print("\n✅ All required files exist!")
    return True


def check_imports():
    """Check if all imports work correctly"""
    print("\n🔍 Checking imports...")

    base_dir = Path(__file__).parent
    sys.path.insert(0, str(base_dir / "src"))
    sys.path.insert(0, str(base_dir))

    try:
        import numpy
        import scipy
        print(f"✅ numpy {numpy.__version__} / scipy {scipy.__version__} imported successfully")

        import pandas
        import pydantic
        print(f"✅ pandas {pandas.__version__} / pydantic {pydantic.VERSION} imported successfully")

        import dotenv
        import tqdm
        print("✅ python-dotenv and tqdm imported successfully")

        from transforms import make_transform
        from channel import generate_channel
        from prior import make_prior
        print("✅ Transform, channel and prior modules imported successfully")

        from detectors import run_detector
        from analysis import predict_ber
        from power import optimize_pa_map
        print("✅ Detector, analysis and power modules imported successfully")

        from harness import run_experiment
        from config.simulation_config import get_config
        print("✅ Harness and configuration imported successfully")

        print("\n✅ All imports successful!")
        return True

    except ImportError as e:
        print(f"\n❌ Import error: {e}")
        return False
    except Exception as e:
        print(f"\n❌ Unexpected error: {e}")
        return False


def check_detection():
    """Run one small noiseless detection"""
    print("\n🔍 Testing a small detection...")

    base_dir = Path(__file__).parent
    sys.path.insert(0, str(base_dir / "src"))

    try:
        import numpy as np

        from channel import identity_channel
        from detectors import run_detector
        from prior import qpsk
        from transforms import TransformKind, make_transform

        n = 64
        prior = qpsk()
        channel = identity_channel(n)
        transform = make_transform(TransformKind.PERMUTATION_DFT, n, seed=1)
        s, bits = prior.sample(n, np.random.default_rng(2))
        y = channel.apply(transform.apply(s))
        trajectory = run_detector(y, channel, transform, prior, 1e-8, truth=s)
        if not np.array_equal(trajectory.decisions, bits):
            print("❌ Noiseless detection made bit errors")
            return False
        print(f"✅ Noiseless detection recovered all {bits.size} bits in {trajectory.iterations} iteration(s)")
        return True

    except Exception as e:
        print(f"❌ Detection failed: {e}")
        return False


def main():
    """Run all verification checks"""
    print("🚀 Random Modulation Toolkit Setup Verification")
    print("=" * 50)

    checks = [
        ("File Structure", check_file_structure),
        ("Python Imports", check_imports),
        ("Detector Smoke Test", check_detection),
    ]

    results = []
    for check_name, check_func in checks:
        print(f"\n📋 {check_name}")
        print("-" * 30)
        result = check_func()
        results.append((check_name, result))

    print("\n" + "=" * 50)
    print("📊 VERIFICATION SUMMARY")
    print("=" * 50)

    all_passed = True
    for check_name, result in results:
        status = "✅ PASS" if result else "❌ FAIL"
        print(f"{status} - {check_name}")
        if not result:
            all_passed = False

    if all_passed:
        print("\n🎉 All checks passed! The toolkit is ready to run.")
        print("Run: python src/main.py run config/experiments/ber_siso.ini")
    else:
        print("\n⚠️ Some checks failed. Please fix the issues above.")
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())
