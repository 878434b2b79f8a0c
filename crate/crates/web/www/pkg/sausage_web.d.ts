/* tslint:disable */
/* eslint-disable */

/**
 * Mean of `D_0[0,t]` over `samples` paths at each horizon of `ts`:
 * `[mean_0, se_0, mean_1, se_1, ...]`.
 */
export function d0_curve(seed: bigint, ts: Float64Array, samples: number): Float64Array;

/**
 * Capacity of the unit sausage of the same path as [`sausage_projection`]:
 * `[Cap, standard error, log t · Cap / t]`.
 */
export function sausage_capacity(seed: bigint, t: number, delta: number, walkers: number): Float64Array;

/**
 * δ-skeleton of a path on `[0, t]`, projected on its first two coordinates
 * and thinned to at most 20 000 points: `[x0, y0, x1, y1, ...]`.
 */
export function sausage_projection(seed: bigint, t: number, delta: number): Float32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly d0_curve: (a: bigint, b: number, c: number, d: number) => [number, number, number, number];
    readonly sausage_capacity: (a: bigint, b: number, c: number, d: number) => [number, number, number, number];
    readonly sausage_projection: (a: bigint, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
