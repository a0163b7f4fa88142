"""Solve an LP file with HiGHS and write the objective and column values."""
import sys

try:
    import highspy
except ImportError:
    sys.exit(77)


def main(lp_path, sol_path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.readModel(lp_path)
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return 2
    values = h.getSolution().col_value
    lp = h.getLp()
    with open(sol_path, "w") as out:
        out.write(f"objective {h.getInfo().objective_function_value!r}\n")
        for name, v in zip(lp.col_names_, values):
            out.write(f"{name} {v!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
