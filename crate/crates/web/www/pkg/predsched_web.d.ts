/* tslint:disable */
/* eslint-disable */

/**
 * Closed-form values for robustness `r`, buffer `p` and `n` queries.
 */
export function closed_form(r: number, p: number, n: number): string;

/**
 * Acceleration ratio of the buffered schedule for prediction `tau` and of
 * the doubling schedule on a log grid of `[1, t_max]`.
 */
export function ratio_curves(r: number, tau: number, p: number, t_max: number, points: number): string;

/**
 * Runs the time (`query = false`) or query experiment on a linear grid of
 * `[2, t_max]` and returns the mean ratio series per buffer value.
 */
export function run_demo_experiment(query: boolean, h: number, buffers: Float64Array, points: number, trials: number, seed: bigint, t_max: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly closed_form: (a: number, b: number, c: number) => [number, number];
    readonly ratio_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly run_demo_experiment: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint, h: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
