// DOM glue. All state lives in the view model; this file only renders
// it and forwards events.

import { ApiClient } from './api.js';
import { AnnotatedToken } from './alignment.js';
import { OVERLAY_TINTS, compositeOverlay } from './overlay.js';
import { OverlayKind, RunView, SessionViewModel } from './session.js';

const api = new ApiClient('');
const model = new SessionViewModel(api);

const el = (id: string) => document.getElementById(id) as HTMLElement;

function tokenSpan(token: AnnotatedToken): HTMLSpanElement {
  const span = document.createElement('span');
  span.textContent = token.text;
  span.className = `token token-${token.color}`;
  if (token.partner !== null) span.title = `aligned with: ${token.partner}`;
  return span;
}

function renderTokens(container: HTMLElement, tokens: AnnotatedToken[]): void {
  container.replaceChildren(...tokens.map(tokenSpan));
}

async function drawRunImage(run: RunView, canvas: HTMLCanvasElement): Promise<void> {
  const img = new Image();
  img.src = run.artifacts['output.png'];
  await img.decode();
  canvas.width = img.naturalWidth;
  canvas.height = img.naturalHeight;
  const ctx = canvas.getContext('2d')!;
  ctx.drawImage(img, 0, 0);
  if (model.activeOverlay === 'none') return;
  const maskUrl =
    model.activeOverlay === 'soft'
      ? run.artifacts['soft_mask.png']
      : run.artifacts['refined_mask.png'];
  if (!maskUrl) return;
  const mask = new Image();
  mask.src = maskUrl;
  await mask.decode();
  const scratch = document.createElement('canvas');
  scratch.width = canvas.width;
  scratch.height = canvas.height;
  const sctx = scratch.getContext('2d')!;
  sctx.drawImage(mask, 0, 0);
  const maskData = sctx.getImageData(0, 0, canvas.width, canvas.height);
  const gray = new Uint8ClampedArray(canvas.width * canvas.height);
  for (let p = 0; p < gray.length; p++) gray[p] = maskData.data[p * 4];
  const baseData = ctx.getImageData(0, 0, canvas.width, canvas.height);
  const blended = compositeOverlay(
    baseData.data,
    gray,
    0.55,
    OVERLAY_TINTS[model.activeOverlay],
  );
  ctx.putImageData(new ImageData(blended, canvas.width, canvas.height), 0, 0);
}

function renderError(): void {
  const banner = el('error-banner');
  if (!model.lastError) {
    banner.hidden = true;
    return;
  }
  banner.hidden = false;
  el('error-message').textContent = model.lastError.message;
  (el('retry-button') as HTMLButtonElement).hidden = !model.lastError.retryable;
}

async function renderRuns(): Promise<void> {
  const list = el('runs');
  list.replaceChildren();
  for (const run of model.runs) {
    const card = document.createElement('div');
    card.className = 'run-card';
    const title = document.createElement('h3');
    title.textContent = `${run.targetCaption} (${run.runId})`;
    card.appendChild(title);
    const source = document.createElement('p');
    const target = document.createElement('p');
    renderTokens(source, run.alignment.source);
    renderTokens(target, run.alignment.target);
    card.append(source, target);
    const canvas = document.createElement('canvas');
    card.appendChild(canvas);
    const hash = document.createElement('code');
    hash.textContent = `output sha256: ${run.outputHash.slice(0, 16)}`;
    card.appendChild(hash);
    list.appendChild(card);
    await drawRunImage(run, canvas);
  }
}

async function refresh(): Promise<void> {
  el('session-id').textContent = model.sessionId;
  (el('source-image') as HTMLImageElement).src = model.imageUrl;
  el('source-caption').textContent = model.sourceCaption;
  renderError();
  await renderRuns();
}

async function createSession(): Promise<void> {
  const file = (el('image-input') as HTMLInputElement).files?.[0];
  const caption = (el('caption-input') as HTMLInputElement).value;
  if (!file || !caption.trim()) return;
  const bytes = new Uint8Array(await file.arrayBuffer());
  let binary = '';
  bytes.forEach((b) => (binary += String.fromCharCode(b)));
  const sessionId = await api.createSession(btoa(binary), caption);
  window.location.hash = sessionId;
  await model.load(sessionId);
  await refresh();
}

async function submit(): Promise<void> {
  model.instructionDraft = (el('instruction-input') as HTMLInputElement).value;
  const seedText = (el('seed-input') as HTMLInputElement).value;
  const config = seedText ? { seed: Number(seedText) } : undefined;
  await model.submitRevision(config);
  await refresh();
}

export async function boot(): Promise<void> {
  el('create-button').addEventListener('click', () => void createSession());
  el('submit-button').addEventListener('click', () => void submit());
  el('retry-button').addEventListener('click', () => void submit());
  for (const kind of ['none', 'soft', 'refined'] as OverlayKind[]) {
    el(`overlay-${kind}`).addEventListener('click', () => {
      model.setOverlay(kind);
      void renderRuns();
    });
  }
  const fromHash = window.location.hash.slice(1);
  if (fromHash) {
    await model.load(fromHash); // reload: rebuild everything from the API
    await refresh();
  }
}

if (typeof document !== 'undefined' && document.readyState !== 'loading') {
  void boot();
} else if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', () => void boot());
}
