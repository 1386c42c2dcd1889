/**
 * Explorer view state and fetch orchestration.
 *
 * One store instance owns everything the views render.  Grid refreshes are
 * tokenized: each request bumps a counter and a response is applied only if
 * its token is still current, so a slow earlier response can never
 * overwrite a newer one.  The excluded set mirrors the server session after
 * every acknowledged update; a selected cell always refers to a cell of the
 * last applied grid.
 */

import {
  ApiClient,
  CellRecord,
  DatasetInfo,
  GridParams,
  ScatterPoint,
} from "./api.js";

export interface SelectedCell {
  alpha: number;
  beta: number;
}

export interface ViewState {
  datasetId: string | null;
  variables: string[];
  nObservations: number;
  sessionId: string | null;
  sort: string;
  x: string;
  y: string;
  resolution: number;
  method: "pearson" | "spearman";
  pThreshold: number;
  selectedCell: SelectedCell | null;
  excluded: Set<number>;
  grid: CellRecord[];
  gridRaw: string;
  scatter: ScatterPoint[];
  highlight: Set<number>;
  error: string | null;
  busy: boolean;
}

type Listener = (state: ViewState) => void;

export class ExplorerStore {
  private state: ViewState = {
    datasetId: null,
    variables: [],
    nObservations: 0,
    sessionId: null,
    sort: "",
    x: "",
    y: "",
    resolution: 21,
    method: "pearson",
    pThreshold: 0.05,
    selectedCell: null,
    excluded: new Set(),
    grid: [],
    gridRaw: "",
    scatter: [],
    highlight: new Set(),
    error: null,
    busy: false,
  };

  private listeners: Listener[] = [];
  private gridToken = 0;

  constructor(private readonly api: ApiClient) {}

  snapshot(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  async loadDataset(info: DatasetInfo): Promise<void> {
    const [sort, x, y] = this.defaultTriple(info.variables);
    this.emit({
      datasetId: info.dataset_id,
      variables: info.variables,
      nObservations: info.n_observations,
      sessionId: null,
      sort,
      x,
      y,
      selectedCell: null,
      excluded: new Set(),
      highlight: new Set(),
      error: null,
    });
    await this.refresh();
  }

  private defaultTriple(variables: string[]): [string, string, string] {
    if (variables.length < 3) {
      throw new Error("need at least three variables to explore");
    }
    return [variables[0] as string, variables[1] as string, variables[2] as string];
  }

  setParams(patch: Partial<Pick<ViewState, "sort" | "x" | "y" | "resolution" | "method" | "pThreshold">>): void {
    this.emit({ ...patch, selectedCell: null, highlight: new Set() });
    void this.refresh();
  }

  /** Fetch grid and scatter for the current parameters (tokenized). */
  async refresh(): Promise<void> {
    const { datasetId, sort, x, y, resolution, method, pThreshold, sessionId } = this.state;
    if (!datasetId) return;
    const token = ++this.gridToken;
    this.emit({ busy: true, error: null });
    const params: GridParams = {
      sort,
      x,
      y,
      r: resolution,
      method,
      p: pThreshold,
      session: sessionId ?? undefined,
    };
    try {
      const [gridRaw, scatter] = await Promise.all([
        this.api.gridRaw(datasetId, params),
        this.api.scatter(datasetId, x, y, sessionId ?? undefined),
      ]);
      if (token !== this.gridToken) return; // superseded; discard
      const grid = JSON.parse(gridRaw) as CellRecord[];
      const selected = this.state.selectedCell;
      const stillThere =
        selected &&
        grid.some((c) => c.alpha === selected.alpha && c.beta === selected.beta);
      this.emit({
        grid,
        gridRaw,
        scatter: scatter.points,
        selectedCell: stillThere ? selected : null,
        highlight: stillThere ? this.state.highlight : new Set(),
        busy: false,
      });
      if (stillThere && selected) await this.fetchHighlight(selected);
    } catch (err) {
      if (token !== this.gridToken) return;
      this.emit({ busy: false, error: String(err) }); // stale view preserved
    }
  }

  /** Click on a grid cell: remember it and highlight its window members. */
  async selectCell(alpha: number, beta: number): Promise<void> {
    const cell = this.state.grid.find((c) => c.alpha === alpha && c.beta === beta);
    if (!cell) return; // not part of the last-fetched grid
    this.emit({ selectedCell: { alpha, beta } });
    await this.fetchHighlight({ alpha, beta });
  }

  private async fetchHighlight(cell: SelectedCell): Promise<void> {
    const { datasetId, sort, sessionId } = this.state;
    if (!datasetId) return;
    try {
      const sub = await this.api.subpopulation(
        datasetId,
        sort,
        cell.alpha,
        cell.beta,
        sessionId ?? undefined
      );
      const current = this.state.selectedCell;
      if (!current || current.alpha !== cell.alpha || current.beta !== cell.beta) return;
      this.emit({ highlight: new Set(sub.indices) });
    } catch (err) {
      this.emit({ error: String(err) });
    }
  }

  clearSelection(): void {
    this.emit({ selectedCell: null, highlight: new Set() });
  }

  /**
   * Toggle exclusion of one observation: update the server session, mirror
   * the acknowledged set, then refetch.  Toggling twice restores the
   * original state.
   */
  async toggleExclusion(index: number): Promise<void> {
    const { datasetId } = this.state;
    if (!datasetId) return;
    const next = new Set(this.state.excluded);
    if (next.has(index)) {
      next.delete(index);
    } else {
      next.add(index);
    }
    try {
      const excluded = [...next].sort((a, b) => a - b);
      let sessionId = this.state.sessionId;
      let ack;
      if (sessionId === null) {
        ack = await this.api.createSession(datasetId, excluded);
        sessionId = ack.session_id;
      } else {
        ack = await this.api.updateSession(datasetId, sessionId, excluded);
      }
      this.emit({ sessionId, excluded: new Set(ack.excluded), error: null });
      await this.refresh();
    } catch (err) {
      this.emit({ error: String(err) });
    }
  }
}
