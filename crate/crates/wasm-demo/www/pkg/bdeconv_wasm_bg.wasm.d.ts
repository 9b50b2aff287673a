/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_deblurdemo_free: (a: number, b: number) => void;
export const checks: (a: bigint) => [number, number, number, number];
export const deblur: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const deblurdemo_blurred: (a: number) => [number, number];
export const deblurdemo_k: (a: number) => number;
export const deblurdemo_nFft: (a: number) => bigint;
export const deblurdemo_original: (a: number) => [number, number];
export const deblurdemo_relerr: (a: number) => number;
export const deblurdemo_relres: (a: number) => number;
export const deblurdemo_restored: (a: number) => [number, number];
export const deblurdemo_size: (a: number) => number;
export const recover: (a: number, b: number, c: number, d: bigint, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
