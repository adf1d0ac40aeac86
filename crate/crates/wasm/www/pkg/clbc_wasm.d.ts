/* tslint:disable */
/* eslint-disable */

/**
 * Columns of one simulated run, ready for plotting.
 */
export class RunSeries {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Time of the last valid sample when the run blew up.
     */
    readonly diverged_at: number | undefined;
    readonly e1: Float64Array;
    readonly sigma_c: Float64Array;
    /**
     * Summary CSV (header and one row), empty for a diverged run.
     */
    readonly summary: string;
    readonly t: Float64Array;
    readonly theta_err: Float64Array;
    readonly u: Float64Array;
}

/**
 * Second-order plant transients: the undamped composite law against both
 * ablations with damping gain `kd`, as CSV.
 */
export function compare_damping(kd: number): string;

/**
 * Unit-step response of `(pole / (s + pole))^order`, sampled every `dt`.
 */
export function filter_step(pole: number, order: number, duration: number, dt: number): Float64Array;

/**
 * Runs a preset (`case1`, `case2`, `case3`) with one controller.
 */
export function simulate(name: string, controller: string, kd: number, duration: number, noise_std: number): RunSeries;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_runseries_free: (a: number, b: number) => void;
    readonly compare_damping: (a: number) => [number, number, number, number];
    readonly filter_step: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly runseries_diverged_at: (a: number) => [number, number];
    readonly runseries_e1: (a: number) => [number, number];
    readonly runseries_sigma_c: (a: number) => [number, number];
    readonly runseries_summary: (a: number) => [number, number];
    readonly runseries_t: (a: number) => [number, number];
    readonly runseries_theta_err: (a: number) => [number, number];
    readonly runseries_u: (a: number) => [number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
