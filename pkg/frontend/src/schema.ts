/** Column schemas of the workbench outputs, and the error type every parser
 * throws.  Schema problems always name the offending file and column. */

export const TRAJECTORY_COLUMNS = [
  "iter",
  "exact_f",
  "gap_to_fstar",
  "f0_est",
  "fs_est",
  "grad_norm_est",
  "alpha",
  "accepted",
  "n_f",
  "n_g_total",
  "shots_cum",
  "switches_cum",
  "comms_cum",
  "wall_clock_s",
] as const;

export const SWEEP_COLUMNS = ["ratio", "q25", "q50", "q75", "crossing"] as const;

export class SchemaError extends Error {
  readonly file: string;

  constructor(file: string, message: string) {
    super(`${file}: ${message}`);
    this.name = "SchemaError";
    this.file = file;
  }
}
