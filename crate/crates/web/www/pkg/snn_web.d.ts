/* tslint:disable */
/* eslint-disable */

export class Playground {
    free(): void;
    [Symbol.dispose](): void;
    accuracy(): number;
    boundary(resolution: number): Float64Array;
    /**
     * `kind` is `two-clusters` or `xor`.
     */
    constructor(kind: string, n: number, seed: bigint, hidden: number);
    points(): Float64Array;
    /**
     * JSON summary of prune-then-retrain.
     */
    prune(target: number, epochs: number, learning_rate: number, batch_size: number): string;
    /**
     * JSON epsilon-sweep table.
     */
    sweep(max_epsilon: number, steps: number): string;
    /**
     * JSON training curve.
     */
    train(epochs: number, learning_rate: number, batch_size: number, momentum: number, adaptive: boolean): string;
}

export function start(): void;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_playground_free: (a: number, b: number) => void;
    readonly playground_accuracy: (a: number) => [number, number, number];
    readonly playground_boundary: (a: number, b: number) => [number, number, number, number];
    readonly playground_new: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number];
    readonly playground_points: (a: number) => [number, number];
    readonly playground_prune: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly playground_sweep: (a: number, b: number, c: number) => [number, number, number, number];
    readonly playground_train: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly start: () => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
