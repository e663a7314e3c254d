/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const __wbg_view_free: (a: number, b: number) => void;
export const demo_abtt: (a: number, b: number, c: number) => [number, number, number];
export const demo_conceptor: (a: number, b: number) => [number, number, number];
export const demo_new: (a: bigint, b: number, c: number, d: number) => [number, number, number];
export const demo_original: (a: number) => number;
export const demo_sliders: (a: number) => number;
export const demo_weightedRemoval: (a: number, b: number, c: number) => [number, number, number];
export const view_averageCosine: (a: number) => number;
export const view_coords: (a: number) => [number, number];
export const view_meanNorm: (a: number) => number;
export const view_spectrum: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
