// Studio controller: owns the interaction log, talks to the service through
// ServiceClient, and re-renders after every event. One request in flight at a
// time; action buttons are disabled while a request is pending.

import { ServiceClient, ServiceError } from './api.js';
import {
  applyEvent,
  initialState,
  maskedDocument,
  orderedMasks,
  type StudioEvent,
  type StudioState,
} from './state.js';
import { renderGenerated, renderLayout, renderNotices, renderSuggestions, type Handlers } from './render.js';

export interface StudioOptions {
  endpoint?: string;
  fetchFn?: typeof fetch;
}

export interface Studio {
  root: HTMLElement;
  state(): StudioState;
  log(): readonly StudioEvent[];
  isPending(): boolean;
  loadDocument(json: string): void;
  requestCompletion(): Promise<void>;
  requestGeneration(): Promise<void>;
}

const SHELL = `
  <div class="notices">
    <div id="banner" class="banner" hidden></div>
    <div id="toast" class="toast" hidden></div>
  </div>
  <section class="panel">
    <h2>Document</h2>
    <textarea id="doc-input" rows="8" spellcheck="false"
      placeholder="Paste document JSON"></textarea>
    <button id="load-btn" type="button">Load</button>
    <div id="layout" class="layout"></div>
    <div id="mask-hint" class="hint" hidden>Toggle a palette slot, then request suggestions.</div>
    <button id="complete-btn" type="button">Suggest colors</button>
    <div id="suggestions" class="suggestions"></div>
  </section>
  <section class="panel">
    <h2>Generate</h2>
    <input id="gen-input" type="text" placeholder="Describe the design, e.g. green grass">
    <button id="generate-btn" type="button">Generate palette</button>
    <div id="gen-validation" class="hint" hidden>Enter a description first.</div>
    <div id="generated" class="gen-strip"></div>
  </section>
  <section class="panel settings">
    <label>Service endpoint
      <input id="endpoint-input" type="text">
    </label>
  </section>
`;

function copyHex(hex: string): void {
  const clipboard = navigator.clipboard;
  if (clipboard && typeof clipboard.writeText === 'function') {
    void clipboard.writeText(hex).catch(() => undefined);
  }
}

export function mountStudio(root: HTMLElement, options: StudioOptions = {}): Studio {
  root.classList.add('studio');
  root.innerHTML = SHELL;

  const byId = <T extends HTMLElement>(id: string): T => {
    const node = root.querySelector<T>(`#${id}`);
    if (!node) throw new Error(`studio shell is missing #${id}`);
    return node;
  };
  const docInput = byId<HTMLTextAreaElement>('doc-input');
  const loadBtn = byId<HTMLButtonElement>('load-btn');
  const layout = byId<HTMLDivElement>('layout');
  const maskHint = byId<HTMLDivElement>('mask-hint');
  const completeBtn = byId<HTMLButtonElement>('complete-btn');
  const suggestionsBox = byId<HTMLDivElement>('suggestions');
  const genInput = byId<HTMLInputElement>('gen-input');
  const generateBtn = byId<HTMLButtonElement>('generate-btn');
  const genValidation = byId<HTMLDivElement>('gen-validation');
  const generatedBox = byId<HTMLDivElement>('generated');
  const endpointInput = byId<HTMLInputElement>('endpoint-input');
  const banner = byId<HTMLDivElement>('banner');
  const toast = byId<HTMLDivElement>('toast');

  let state = initialState(options.endpoint ?? '/v1');
  const events: StudioEvent[] = [];
  let pending = false;

  endpointInput.value = state.endpoint;

  const handlers: Handlers = {
    onToggleMask: (element, slot) => dispatch({ kind: 'toggle-mask', element, slot }),
    onAccept: (element, slot) => dispatch({ kind: 'accept', element, slot }),
    onReject: (element, slot) => dispatch({ kind: 'reject', element, slot }),
    onCopy: copyHex,
  };

  function render(): void {
    renderLayout(layout, state.document, state.masks, handlers);
    renderSuggestions(suggestionsBox, state.suggestions, handlers, pending);
    renderGenerated(generatedBox, state.generatedPalette, handlers);
    renderNotices(banner, toast, state);
    maskHint.hidden = !state.document || state.masks.length > 0;
    completeBtn.disabled = pending || !state.document || state.masks.length === 0;
    generateBtn.disabled = pending;
    loadBtn.disabled = pending;
  }

  function dispatch(event: StudioEvent): void {
    events.push(event);
    state = applyEvent(state, event);
    render();
  }

  function client(): ServiceClient {
    return new ServiceClient(state.endpoint, options.fetchFn);
  }

  function describe(err: unknown, action: string): string {
    if (err instanceof ServiceError) {
      return err.status === 0
        ? `${action}: ${err.message}`
        : `${action} failed (${err.status}): ${err.message}`;
    }
    return `${action} failed: ${String(err)}`;
  }

  async function requestCompletion(): Promise<void> {
    if (pending || !state.document || orderedMasks(state).length === 0) return;
    pending = true;
    render();
    try {
      const res = await client().complete(maskedDocument(state));
      dispatch({ kind: 'suggestions', colors: res.colors, exemplarId: res.exemplar_id });
    } catch (err) {
      dispatch({ kind: 'service-error', message: describe(err, 'completion') });
    } finally {
      pending = false;
      render();
    }
  }

  async function requestGeneration(): Promise<void> {
    if (pending) return;
    if (state.generationText.trim() === '') {
      genValidation.hidden = false;
      return;
    }
    genValidation.hidden = true;
    pending = true;
    render();
    try {
      const res = await client().generate(state.generationText.trim());
      dispatch({ kind: 'generated', palette: res.palette, exemplarId: res.exemplar_id });
    } catch (err) {
      dispatch({ kind: 'service-error', message: describe(err, 'generation') });
    } finally {
      pending = false;
      render();
    }
  }

  loadBtn.addEventListener('click', () => dispatch({ kind: 'load', json: docInput.value }));
  completeBtn.addEventListener('click', () => void requestCompletion());
  generateBtn.addEventListener('click', () => void requestGeneration());
  genInput.addEventListener('input', () => {
    dispatch({ kind: 'set-text', text: genInput.value });
    if (genInput.value.trim() !== '') genValidation.hidden = true;
  });
  endpointInput.addEventListener('change', () =>
    dispatch({ kind: 'set-endpoint', url: endpointInput.value.trim() || '/v1' }),
  );

  render();
  return {
    root,
    state: () => state,
    log: () => events.slice(),
    isPending: () => pending,
    loadDocument: (json) => dispatch({ kind: 'load', json }),
    requestCompletion,
    requestGeneration,
  };
}
