/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * ABTT with the top `d` directions removed.
     */
    abtt(d: number, remove_mean: boolean): View;
    conceptor(aperture: number): View;
    /**
     * `points` vectors in `dim` dimensions. Every vector shares a common
     * offset of length `offset`, and per-axis noise decays with the axis
     * index, so a few directions dominate.
     */
    constructor(seed: bigint, points: number, dim: number, offset: number);
    /**
     * The untouched cloud.
     */
    original(): View;
    /**
     * Weighted removal with one weight per slider direction.
     */
    weightedRemoval(alphas: Float64Array): View;
    readonly sliders: number;
}

/**
 * A transformed cloud as the page draws it.
 */
export class View {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly averageCosine: number;
    /**
     * Interleaved `x0, y0, x1, y1, ...` on the original PC1/PC2 axes.
     */
    readonly coords: Float64Array;
    readonly meanNorm: number;
    readonly spectrum: Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly __wbg_view_free: (a: number, b: number) => void;
    readonly demo_abtt: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_conceptor: (a: number, b: number) => [number, number, number];
    readonly demo_new: (a: bigint, b: number, c: number, d: number) => [number, number, number];
    readonly demo_original: (a: number) => number;
    readonly demo_sliders: (a: number) => number;
    readonly demo_weightedRemoval: (a: number, b: number, c: number) => [number, number, number];
    readonly view_averageCosine: (a: number) => number;
    readonly view_coords: (a: number) => [number, number];
    readonly view_meanNorm: (a: number) => number;
    readonly view_spectrum: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
