/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_get_kernelview_axis: (a: number) => [number, number];
export const __wbg_get_kernelview_eigenvalues: (a: number) => [number, number];
export const __wbg_get_kernelview_n: (a: number) => number;
export const __wbg_get_kernelview_values: (a: number) => [number, number];
export const __wbg_get_pair_forcing: (a: number) => [number, number];
export const __wbg_get_pair_forcing_x: (a: number) => [number, number];
export const __wbg_get_pair_response: (a: number) => [number, number];
export const __wbg_get_pair_response_x: (a: number) => [number, number];
export const __wbg_get_trainview_error_percent: (a: number) => number;
export const __wbg_get_trainview_exact: (a: number) => number;
export const __wbg_get_trainview_learned: (a: number) => number;
export const __wbg_get_trainview_losses: (a: number) => [number, number];
export const __wbg_get_trainview_phase_boundary: (a: number) => number;
export const __wbg_kernelview_free: (a: number, b: number) => void;
export const __wbg_pair_free: (a: number, b: number) => void;
export const __wbg_set_kernelview_axis: (a: number, b: number, c: number) => void;
export const __wbg_set_kernelview_eigenvalues: (a: number, b: number, c: number) => void;
export const __wbg_set_kernelview_n: (a: number, b: number) => void;
export const __wbg_set_kernelview_values: (a: number, b: number, c: number) => void;
export const __wbg_set_pair_forcing: (a: number, b: number, c: number) => void;
export const __wbg_set_pair_forcing_x: (a: number, b: number, c: number) => void;
export const __wbg_set_pair_response: (a: number, b: number, c: number) => void;
export const __wbg_set_pair_response_x: (a: number, b: number, c: number) => void;
export const __wbg_set_trainview_error_percent: (a: number, b: number) => void;
export const __wbg_set_trainview_exact: (a: number, b: number) => void;
export const __wbg_set_trainview_learned: (a: number, b: number) => void;
export const __wbg_set_trainview_losses: (a: number, b: number, c: number) => void;
export const __wbg_set_trainview_phase_boundary: (a: number, b: number) => void;
export const __wbg_trainview_free: (a: number, b: number) => void;
export const exact_kernel: (a: number, b: number, c: number) => [number, number, number];
export const kernel_operators: () => [number, number];
export const pair_operators: () => [number, number];
export const sample_pair: (a: number, b: number, c: number, d: number) => [number, number, number];
export const train_small: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
