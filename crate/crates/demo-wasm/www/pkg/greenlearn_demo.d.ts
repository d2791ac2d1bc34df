/* tslint:disable */
/* eslint-disable */

/**
 * A kernel tabulated on an `n × n` grid, row-major with `x` along rows.
 */
export class KernelView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    axis: Float64Array;
    /**
     * Leading eigenvalues of the integral operator, largest first.
     */
    eigenvalues: Float64Array;
    n: number;
    values: Float64Array;
}

/**
 * A forcing and its response on their sampling grids.
 */
export class Pair {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    forcing_x: Float64Array;
    forcing: Float64Array;
    response_x: Float64Array;
    response: Float64Array;
}

/**
 * Outcome of [`train_small`].
 */
export class TrainView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Relative L² error of the learned kernel in percent.
     */
    error_percent: number;
    exact: KernelView;
    learned: KernelView;
    losses: Float64Array;
    /**
     * Index in `losses` where Adam hands over to L-BFGS.
     */
    phase_boundary: number;
}

export function exact_kernel(name: string, n: number): KernelView;

/**
 * Names accepted by [`exact_kernel`] and [`train_small`].
 */
export function kernel_operators(): string[];

/**
 * Names accepted by [`sample_pair`]: every one-dimensional scalar operator.
 */
export function pair_operators(): string[];

/**
 * Draws a forcing from the operator's Gaussian process (normalized
 * length-scale `length_scale`) and solves for the response.
 */
export function sample_pair(name: string, seed: number, length_scale: number): Pair;

/**
 * Trains Green's and homogeneous networks (two hidden layers of 16) on
 * 40 random pairs and compares the learned kernel with the exact one on
 * an `n × n` grid.
 */
export function train_small(name: string, seed: number, iterations: number, n: number): TrainView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_get_kernelview_axis: (a: number) => [number, number];
    readonly __wbg_get_kernelview_eigenvalues: (a: number) => [number, number];
    readonly __wbg_get_kernelview_n: (a: number) => number;
    readonly __wbg_get_kernelview_values: (a: number) => [number, number];
    readonly __wbg_get_pair_forcing: (a: number) => [number, number];
    readonly __wbg_get_pair_forcing_x: (a: number) => [number, number];
    readonly __wbg_get_pair_response: (a: number) => [number, number];
    readonly __wbg_get_pair_response_x: (a: number) => [number, number];
    readonly __wbg_get_trainview_error_percent: (a: number) => number;
    readonly __wbg_get_trainview_exact: (a: number) => number;
    readonly __wbg_get_trainview_learned: (a: number) => number;
    readonly __wbg_get_trainview_losses: (a: number) => [number, number];
    readonly __wbg_get_trainview_phase_boundary: (a: number) => number;
    readonly __wbg_kernelview_free: (a: number, b: number) => void;
    readonly __wbg_pair_free: (a: number, b: number) => void;
    readonly __wbg_set_kernelview_axis: (a: number, b: number, c: number) => void;
    readonly __wbg_set_kernelview_eigenvalues: (a: number, b: number, c: number) => void;
    readonly __wbg_set_kernelview_n: (a: number, b: number) => void;
    readonly __wbg_set_kernelview_values: (a: number, b: number, c: number) => void;
    readonly __wbg_set_pair_forcing: (a: number, b: number, c: number) => void;
    readonly __wbg_set_pair_forcing_x: (a: number, b: number, c: number) => void;
    readonly __wbg_set_pair_response: (a: number, b: number, c: number) => void;
    readonly __wbg_set_pair_response_x: (a: number, b: number, c: number) => void;
    readonly __wbg_set_trainview_error_percent: (a: number, b: number) => void;
    readonly __wbg_set_trainview_exact: (a: number, b: number) => void;
    readonly __wbg_set_trainview_learned: (a: number, b: number) => void;
    readonly __wbg_set_trainview_losses: (a: number, b: number, c: number) => void;
    readonly __wbg_set_trainview_phase_boundary: (a: number, b: number) => void;
    readonly __wbg_trainview_free: (a: number, b: number) => void;
    readonly exact_kernel: (a: number, b: number, c: number) => [number, number, number];
    readonly kernel_operators: () => [number, number];
    readonly pair_operators: () => [number, number];
    readonly sample_pair: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly train_small: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
