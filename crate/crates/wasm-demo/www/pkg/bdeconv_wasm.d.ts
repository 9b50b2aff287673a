/* tslint:disable */
/* eslint-disable */

export class DeblurDemo {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    blurred(): Float64Array;
    /**
     * Pixel values, column-major.
     */
    original(): Float64Array;
    restored(): Float64Array;
    readonly k: number;
    readonly nFft: bigint;
    readonly relerr: number;
    readonly relres: number;
    readonly size: number;
}

/**
 * The invariant suite as CSV.
 */
export function checks(seed: bigint): string;

/**
 * Blur the built-in scene with a 45 degree motion kernel and recover both.
 */
export function deblur(size: number, kernel_len: number, n: number, iters: number, dilate: number): DeblurDemo;

/**
 * One synthetic recovery; returns a JSON object with counts and RMSE.
 */
export function recover(l: number, k: number, n: number, seed: bigint, algorithm: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_deblurdemo_free: (a: number, b: number) => void;
    readonly checks: (a: bigint) => [number, number, number, number];
    readonly deblur: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly deblurdemo_blurred: (a: number) => [number, number];
    readonly deblurdemo_k: (a: number) => number;
    readonly deblurdemo_nFft: (a: number) => bigint;
    readonly deblurdemo_original: (a: number) => [number, number];
    readonly deblurdemo_relerr: (a: number) => number;
    readonly deblurdemo_relres: (a: number) => number;
    readonly deblurdemo_restored: (a: number) => [number, number];
    readonly deblurdemo_size: (a: number) => number;
    readonly recover: (a: number, b: number, c: number, d: bigint, e: number, f: number) => [number, number, number, number];
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
