/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_runseries_free: (a: number, b: number) => void;
export const compare_damping: (a: number) => [number, number, number, number];
export const filter_step: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const runseries_diverged_at: (a: number) => [number, number];
export const runseries_e1: (a: number) => [number, number];
export const runseries_sigma_c: (a: number) => [number, number];
export const runseries_summary: (a: number) => [number, number];
export const runseries_t: (a: number) => [number, number];
export const runseries_theta_err: (a: number) => [number, number];
export const runseries_u: (a: number) => [number, number];
export const simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
