// Session view model: the entire view state is reconstructable from the
// API at any time (no client-side computation of masks or plans).

import { ApiClient, ApiError, sha256Hex } from './api.js';
import { AlignmentView, buildAlignmentView } from './alignment.js';
import { PlanJson, RunManifest } from './types.js';

export type OverlayKind = 'none' | 'soft' | 'refined';

export interface RunView {
  runId: string;
  targetCaption: string;
  complete: boolean;
  artifacts: Record<string, string>;
  alignment: AlignmentView;
  metrics: unknown;
  outputHash: string;
}

export interface ErrorState {
  message: string;
  retryable: boolean;
}

export class SessionViewModel {
  sessionId = '';
  sourceCaption = '';
  imageUrl = '';
  runs: RunView[] = [];
  activeOverlay: OverlayKind = 'none';
  instructionDraft = '';
  lastError: ErrorState | null = null;

  constructor(private api: ApiClient) {}

  /** Rebuild the whole view from the API; used on load and reload. */
  async load(sessionId: string): Promise<void> {
    const history = await this.api.getHistory(sessionId);
    this.sessionId = history.id;
    this.sourceCaption = history.source_caption;
    this.imageUrl = history.image_url;
    this.runs = [];
    for (const run of history.runs) {
      this.runs.push(await this.buildRunView(run));
    }
  }

  private async buildRunView(run: RunManifest): Promise<RunView> {
    const manifest = await this.api.getArtifacts(this.sessionId, run.run_id);
    const plan = await this.api.fetchJson<PlanJson>(manifest.artifacts['plan.json']);
    const metrics = await this.api.fetchJson<unknown>(manifest.artifacts['metrics.json']);
    const output = await this.api.fetchBytes(manifest.artifacts['output.png']);
    return {
      runId: run.run_id,
      targetCaption: run.target_caption,
      complete: run.complete,
      artifacts: manifest.artifacts,
      alignment: buildAlignmentView(plan),
      metrics,
      outputHash: await sha256Hex(output),
    };
  }

  /** Post the draft as a new edit; appends the run on success. */
  async submitRevision(config?: Record<string, unknown>): Promise<RunView | null> {
    const draft = this.instructionDraft.trim();
    if (!draft) {
      this.lastError = { message: 'instruction is empty', retryable: false };
      return null;
    }
    this.lastError = null;
    try {
      const runId = await this.api.postEdit(this.sessionId, draft, config);
      const history = await this.api.getHistory(this.sessionId);
      const manifest = history.runs.find((r) => r.run_id === runId);
      if (!manifest) throw new ApiError(500, `run ${runId} missing from history`);
      const view = await this.buildRunView(manifest);
      this.runs.push(view);
      return view;
    } catch (error) {
      if (error instanceof ApiError) {
        this.lastError = { message: error.message, retryable: error.retryable };
        return null;
      }
      throw error;
    }
  }

  setOverlay(kind: OverlayKind): void {
    this.activeOverlay = kind;
  }
}
