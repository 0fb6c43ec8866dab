/* tslint:disable */
/* eslint-disable */

/**
 * Single-cell lower (doubled Dirichlet) and upper (Neumann) bounds averaged over `samples`.
 */
export function bracket(lattice: string, disorder: number, samples: number, seed: number): string;

/**
 * Exhaustion on centered boxes of radius `1, 2, 4, ..` up to `max_radius`
 * for one realization, together with the periodic reference curve.
 */
export function ids_curves(lattice: string, disorder: number, max_radius: number, seed: number): string;

/**
 * Wegner experiment at `energy` on line boxes of 16, 32 and 64 cells over
 * a fixed ε grid.
 */
export function wegner_scan(disorder: number, energy: number, samples: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bracket: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly ids_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly wegner_scan: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
