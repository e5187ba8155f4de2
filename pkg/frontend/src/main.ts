/** Entry point: owns the mutable store, the render tick, and event wiring.
 *
 * Everything interesting is delegated: state transitions to the reducer,
 * markup to the renderers, time to the offset helpers. This file is the
 * only one that touches the DOM or the network.
 */

import { ApiClient, RequestRejected } from "./api.js";
import { renderApp } from "./render.js";
import { Action, AppState, initialState, reducer, validateMax } from "./state.js";
import { computeOffset, serverNow } from "./time.js";
import { openStream } from "./stream.js";

const BASE = "";

const root = document.getElementById("app") as HTMLElement;
const api = new ApiClient(BASE);

let state: AppState = initialState();
let offset = 0;
let rendered = "";
let source: EventSource | null = null;

function now(): number {
  return serverNow(offset, Date.now());
}

function render(): void {
  const html = renderApp(state, now());
  if (html !== rendered) {
    rendered = html;
    root.innerHTML = html;
  }
}

function dispatch(action: Action): void {
  state = reducer(state, action);
  render();
}

async function connect(): Promise<void> {
  // anchor countdowns to the server clock, then take a snapshot
  const time = await api.serverTime();
  offset = computeOffset(time.now, Date.now());
  const listing = await api.listAuctions();
  dispatch({ type: "snapshot", auctions: listing.auctions });
  const mine = await api.myAutobids();
  dispatch({ type: "autobids", autobids: mine.autobids });
  source?.close();
  source = openStream(BASE, state.lastSequence, {
    onEvent: (event) => dispatch({ type: "stream", event }),
    onDown: (detail) => dispatch({ type: "network-error", detail }),
    onUp: () => {
      if (state.banner?.retry) dispatch({ type: "dismiss-banner" });
    },
  });
}

function fail(error: unknown): void {
  if (error instanceof RequestRejected) {
    dispatch({ type: "action-failed", detail: error.body.detail });
  } else {
    dispatch({ type: "network-error", detail: String(error) });
  }
}

async function submitLogin(form: HTMLFormElement): Promise<void> {
  const name = (new FormData(form).get("name") as string | null)?.trim();
  if (!name) return;
  try {
    const session = await api.openSession(name);
    api.setToken(session.token);
    dispatch({ type: "session", name: session.name, token: session.token });
    await connect();
  } catch (error) {
    fail(error);
  }
}

async function submitBid(form: HTMLFormElement): Promise<void> {
  const auctionId = form.dataset.auction as string;
  const amount = Number(new FormData(form).get("amount"));
  try {
    const result = await api.placeBid(auctionId, amount);
    dispatch({ type: "bid-accepted", auction: result.auction });
  } catch (error) {
    if (error instanceof RequestRejected && error.body.error === "bid-too-low") {
      dispatch({
        type: "bid-rejected",
        auctionId,
        detail: error.body.detail,
        requiredMinimum: error.body.required_minimum ?? null,
      });
    } else {
      fail(error);
    }
  }
}

async function submitAutobid(form: HTMLFormElement): Promise<void> {
  const auctionId = form.dataset.auction as string;
  const max = Number(new FormData(form).get("max"));
  const auction = state.auctions[auctionId];
  // reject obviously-too-low maxima without a round trip
  const problem = auction ? validateMax(auction, max) : null;
  if (problem) {
    dispatch({ type: "action-failed", detail: problem });
    return;
  }
  try {
    const autobid = await api.createAutobid(auctionId, max);
    dispatch({ type: "autobid-saved", autobid });
  } catch (error) {
    fail(error);
  }
}

async function submitRaise(form: HTMLFormElement): Promise<void> {
  const autobidId = form.dataset.autobid as string;
  const max = Number(new FormData(form).get("max"));
  try {
    const autobid = await api.raiseMax(autobidId, max);
    dispatch({ type: "autobid-saved", autobid });
    dispatch({ type: "dismiss-at-max" });
  } catch (error) {
    fail(error);
  }
}

async function cancelAutobid(autobidId: string): Promise<void> {
  try {
    const autobid = await api.cancelAutobid(autobidId);
    dispatch({ type: "autobid-saved", autobid });
    dispatch({ type: "dismiss-at-max" });
  } catch (error) {
    fail(error);
  }
}

async function submitReports(form: HTMLFormElement): Promise<void> {
  const item = (new FormData(form).get("item") as string | null)?.trim();
  if (!item) return;
  let stats = null;
  let prediction = null;
  try {
    stats = await api.statsReport(item);
  } catch (error) {
    if (!(error instanceof RequestRejected && error.status === 404)) {
      fail(error);
      return;
    }
  }
  try {
    prediction = await api.predictionReport(item);
  } catch (error) {
    if (!(error instanceof RequestRejected && error.status === 404)) {
      fail(error);
      return;
    }
  }
  const empty =
    stats === null && prediction === null ? `no sales history for "${item}"` : null;
  dispatch({ type: "reports", item, stats, prediction, empty });
}

async function fetchAdvice(): Promise<void> {
  const auctionId = state.selected;
  if (!auctionId) return;
  dispatch({ type: "advice-loading" });
  try {
    const view = await api.getAdvice(auctionId);
    dispatch({ type: "advice", view });
  } catch (error) {
    if (error instanceof RequestRejected && error.body.error === "insufficient-history") {
      dispatch({ type: "advice-refused", reason: error.body.detail });
    } else {
      fail(error);
    }
  }
}

root.addEventListener("submit", (raw) => {
  raw.preventDefault();
  const form = raw.target as HTMLFormElement;
  switch (form.dataset.form) {
    case "login":
      void submitLogin(form);
      break;
    case "bid":
      void submitBid(form);
      break;
    case "autobid":
      void submitAutobid(form);
      break;
    case "raise":
      void submitRaise(form);
      break;
    case "reports":
      void submitReports(form);
      break;
  }
});

root.addEventListener("click", (raw) => {
  const target = (raw.target as HTMLElement).closest("[data-action],[data-auction]");
  if (!target) return;
  const action = (target as HTMLElement).dataset.action;
  if (action === "dismiss-banner") {
    dispatch({ type: "dismiss-banner" });
  } else if (action === "retry") {
    dispatch({ type: "dismiss-banner" });
    void connect().catch(fail);
  } else if (action === "cancel-autobid") {
    void cancelAutobid((target as HTMLElement).dataset.autobid as string);
  } else if (action === "advice") {
    void fetchAdvice();
  } else if (target.matches("tr.auction")) {
    dispatch({ type: "select", auctionId: (target as HTMLElement).dataset.auction ?? null });
  }
});

setInterval(render, 1000); // countdowns advance even with no new events
render();
