/* tslint:disable */
/* eslint-disable */

/**
 * End-to-end harmonic retrieval on a cubic grid; returns per-axis true and
 * estimated angular frequencies plus the matched error.
 */
export function harmonic_demo(k_modes: number, grid_edge: number, snr_db: number, seed: bigint): string;

/**
 * Runs gradient descent, conjugate gradient, and quasi-Newton on the same
 * seeded noisy instance; returns objective traces and summary numbers.
 */
export function solver_traces(n: number, k: number, snr_db: number, seed: bigint, init: string, max_iters: number): string;

/**
 * Samples the objective along the two gradient directions from the
 * eigenvector-sum starting basis: the raw (additive) direction and the
 * basis-changed (multiplicative) one. The singularity-free radius of the
 * multiplicative direction is typically several times larger.
 */
export function step_slice(n: number, k: number, snr_db: number, seed: bigint, points: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly harmonic_demo: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly solver_traces: (a: number, b: number, c: number, d: bigint, e: number, f: number, g: number) => [number, number, number, number];
    readonly step_slice: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number, number];
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
